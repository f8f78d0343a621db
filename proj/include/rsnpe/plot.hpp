#pragma once

#include <array>
#include <string>
#include <vector>

#include "rsnpe/calibration.hpp"
#include "rsnpe/common.hpp"
#include "rsnpe/simulator.hpp"

namespace rsnpe::plot {

/// Minimal RGB raster with PNG output (zlib stored blocks, no compression).
class Canvas {
public:
    Canvas(int width, int height);

    int width() const { return width_; }
    int height() const { return height_; }

    void fill(uint8_t r, uint8_t g, uint8_t b);
    void set_pixel(int x, int y, uint8_t r, uint8_t g, uint8_t b);
    void draw_line(int x0, int y0, int x1, int y1, uint8_t r, uint8_t g, uint8_t b);
    void fill_rect(int x0, int y0, int x1, int y1, uint8_t r, uint8_t g, uint8_t b);
    /// 5x7 bitmap font, scaled by `scale`; lowercase letters, digits and basic
    /// punctuation only.
    void draw_text(int x, int y, const std::string& text, uint8_t r, uint8_t g, uint8_t b,
                   int scale = 1);

    void save_png(const std::string& path) const;

private:
    int width_, height_;
    std::vector<uint8_t> pixels_;
};

/// Corner plot of posterior samples: 1-D kernel density marginals on the
/// diagonal, 2-D kernel density heat maps with 50/80/95% mass contours below.
void corner_plot(const std::vector<simulator::TerrainParams>& samples,
                 const std::string& path);

/// Per-dimension SBC rank histograms with the uniform expectation band.
void rank_histogram(const std::array<calibration::RankRecord, 3>& ranks,
                    const std::string& path);

}  // namespace rsnpe::plot
