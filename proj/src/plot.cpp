#include "rsnpe/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace rsnpe::plot {

namespace {

// ---------------------------------------------------------------- PNG output

uint32_t crc32_update(uint32_t crc, const uint8_t* data, std::size_t len) {
    static uint32_t table[256];
    static bool init = false;
    if (!init) {
        for (uint32_t n = 0; n < 256; ++n) {
            uint32_t c = n;
            for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xedb88320u ^ (c >> 1) : c >> 1;
            table[n] = c;
        }
        init = true;
    }
    crc ^= 0xffffffffu;
    for (std::size_t i = 0; i < len; ++i) crc = table[(crc ^ data[i]) & 0xff] ^ (crc >> 8);
    return crc ^ 0xffffffffu;
}

void push_u32(std::vector<uint8_t>& out, uint32_t v) {
    out.push_back(static_cast<uint8_t>(v >> 24));
    out.push_back(static_cast<uint8_t>(v >> 16));
    out.push_back(static_cast<uint8_t>(v >> 8));
    out.push_back(static_cast<uint8_t>(v));
}

void push_chunk(std::vector<uint8_t>& out, const char type[4],
                const std::vector<uint8_t>& data) {
    push_u32(out, static_cast<uint32_t>(data.size()));
    const std::size_t start = out.size();
    out.insert(out.end(), type, type + 4);
    out.insert(out.end(), data.begin(), data.end());
    push_u32(out, crc32_update(0, out.data() + start, out.size() - start));
}

// --------------------------------------------------------------- 5x7 bitmaps

struct Glyph {
    char c;
    uint8_t col[5];  // column-major, LSB = top row
};

constexpr Glyph kFont[] = {
    {' ', {0x00, 0x00, 0x00, 0x00, 0x00}}, {'0', {0x3e, 0x51, 0x49, 0x45, 0x3e}},
    {'1', {0x00, 0x42, 0x7f, 0x40, 0x00}}, {'2', {0x42, 0x61, 0x51, 0x49, 0x46}},
    {'3', {0x21, 0x41, 0x45, 0x4b, 0x31}}, {'4', {0x18, 0x14, 0x12, 0x7f, 0x10}},
    {'5', {0x27, 0x45, 0x45, 0x45, 0x39}}, {'6', {0x3c, 0x4a, 0x49, 0x49, 0x30}},
    {'7', {0x01, 0x71, 0x09, 0x05, 0x03}}, {'8', {0x36, 0x49, 0x49, 0x49, 0x36}},
    {'9', {0x06, 0x49, 0x49, 0x29, 0x1e}}, {'.', {0x00, 0x60, 0x60, 0x00, 0x00}},
    {',', {0x00, 0x50, 0x30, 0x00, 0x00}}, {'-', {0x08, 0x08, 0x08, 0x08, 0x08}},
    {'+', {0x08, 0x08, 0x3e, 0x08, 0x08}}, {'=', {0x14, 0x14, 0x14, 0x14, 0x14}},
    {'(', {0x00, 0x1c, 0x22, 0x41, 0x00}}, {')', {0x00, 0x41, 0x22, 0x1c, 0x00}},
    {'/', {0x20, 0x10, 0x08, 0x04, 0x02}}, {'%', {0x23, 0x13, 0x08, 0x64, 0x62}},
    {'_', {0x40, 0x40, 0x40, 0x40, 0x40}}, {'a', {0x20, 0x54, 0x54, 0x54, 0x78}},
    {'b', {0x7f, 0x48, 0x44, 0x44, 0x38}}, {'c', {0x38, 0x44, 0x44, 0x44, 0x20}},
    {'d', {0x38, 0x44, 0x44, 0x48, 0x7f}}, {'e', {0x38, 0x54, 0x54, 0x54, 0x18}},
    {'f', {0x08, 0x7e, 0x09, 0x01, 0x02}}, {'g', {0x0c, 0x52, 0x52, 0x52, 0x3e}},
    {'h', {0x7f, 0x08, 0x04, 0x04, 0x78}}, {'i', {0x00, 0x44, 0x7d, 0x40, 0x00}},
    {'j', {0x20, 0x40, 0x44, 0x3d, 0x00}}, {'k', {0x7f, 0x10, 0x28, 0x44, 0x00}},
    {'l', {0x00, 0x41, 0x7f, 0x40, 0x00}}, {'m', {0x7c, 0x04, 0x18, 0x04, 0x78}},
    {'n', {0x7c, 0x08, 0x04, 0x04, 0x78}}, {'o', {0x38, 0x44, 0x44, 0x44, 0x38}},
    {'p', {0x7c, 0x14, 0x14, 0x14, 0x08}}, {'q', {0x08, 0x14, 0x14, 0x18, 0x7c}},
    {'r', {0x7c, 0x08, 0x04, 0x04, 0x08}}, {'s', {0x48, 0x54, 0x54, 0x54, 0x20}},
    {'t', {0x04, 0x3f, 0x44, 0x40, 0x20}}, {'u', {0x3c, 0x40, 0x40, 0x20, 0x7c}},
    {'v', {0x1c, 0x20, 0x40, 0x20, 0x1c}}, {'w', {0x3c, 0x40, 0x30, 0x40, 0x3c}},
    {'x', {0x44, 0x28, 0x10, 0x28, 0x44}}, {'y', {0x0c, 0x50, 0x50, 0x50, 0x3c}},
    {'z', {0x44, 0x64, 0x54, 0x4c, 0x44}},
};

const uint8_t* find_glyph(char c) {
    for (const auto& g : kFont) {
        if (g.c == c) return g.col;
    }
    return nullptr;
}

// ------------------------------------------------------------ KDE utilities

struct Grid2D {
    int n;
    Real x_lo, x_hi, y_lo, y_hi;
    std::vector<Real> density;  // row-major, density[yi * n + xi]
};

void gaussian_blur_1d(std::vector<Real>& v, Real sigma_bins) {
    if (sigma_bins <= 0.0) return;
    const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma_bins)));
    std::vector<Real> kernel(2 * radius + 1);
    Real sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        kernel[i + radius] = std::exp(-0.5 * (i / sigma_bins) * (i / sigma_bins));
        sum += kernel[i + radius];
    }
    for (auto& k : kernel) k /= sum;
    std::vector<Real> out(v.size(), 0.0);
    const int n = static_cast<int>(v.size());
    for (int i = 0; i < n; ++i) {
        for (int j = -radius; j <= radius; ++j) {
            const int src = i + j;
            if (src >= 0 && src < n) out[i] += v[src] * kernel[j + radius];
        }
    }
    v = std::move(out);
}

Real silverman_bandwidth(const std::vector<Real>& v) {
    Real mean = 0.0;
    for (const Real x : v) mean += x;
    mean /= static_cast<Real>(v.size());
    Real var = 0.0;
    for (const Real x : v) var += (x - mean) * (x - mean);
    var /= static_cast<Real>(v.size());
    const Real sd = std::sqrt(std::max(var, 1e-30));
    return 1.06 * sd * std::pow(static_cast<Real>(v.size()), -0.2);
}

Grid2D kde_2d(const std::vector<Real>& x, const std::vector<Real>& y, int n_grid) {
    Grid2D g;
    g.n = n_grid;
    const auto [xmin_it, xmax_it] = std::minmax_element(x.begin(), x.end());
    const auto [ymin_it, ymax_it] = std::minmax_element(y.begin(), y.end());
    const Real xpad = std::max(1e-12, 0.08 * (*xmax_it - *xmin_it));
    const Real ypad = std::max(1e-12, 0.08 * (*ymax_it - *ymin_it));
    g.x_lo = *xmin_it - xpad;
    g.x_hi = *xmax_it + xpad;
    g.y_lo = *ymin_it - ypad;
    g.y_hi = *ymax_it + ypad;

    g.density.assign(static_cast<std::size_t>(n_grid) * n_grid, 0.0);
    const Real dx = (g.x_hi - g.x_lo) / n_grid;
    const Real dy = (g.y_hi - g.y_lo) / n_grid;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const int xi = std::clamp(static_cast<int>((x[i] - g.x_lo) / dx), 0, n_grid - 1);
        const int yi = std::clamp(static_cast<int>((y[i] - g.y_lo) / dy), 0, n_grid - 1);
        g.density[static_cast<std::size_t>(yi) * n_grid + xi] += 1.0;
    }

    // Separable Gaussian smoothing with Silverman bandwidths.
    const Real bx = silverman_bandwidth(x) / dx;
    const Real by = silverman_bandwidth(y) / dy;
    std::vector<Real> row(n_grid), col(n_grid);
    for (int r = 0; r < n_grid; ++r) {
        for (int c = 0; c < n_grid; ++c) {
            row[c] = g.density[static_cast<std::size_t>(r) * n_grid + c];
        }
        gaussian_blur_1d(row, bx);
        for (int c = 0; c < n_grid; ++c) {
            g.density[static_cast<std::size_t>(r) * n_grid + c] = row[c];
        }
    }
    for (int c = 0; c < n_grid; ++c) {
        for (int r = 0; r < n_grid; ++r) {
            col[r] = g.density[static_cast<std::size_t>(r) * n_grid + c];
        }
        gaussian_blur_1d(col, by);
        for (int r = 0; r < n_grid; ++r) {
            g.density[static_cast<std::size_t>(r) * n_grid + c] = col[r];
        }
    }
    return g;
}

/// Density thresholds whose superlevel sets enclose the requested mass
/// fractions.
std::vector<Real> mass_levels(const std::vector<Real>& density,
                              const std::vector<Real>& fractions) {
    std::vector<Real> sorted = density;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    const Real total = std::accumulate(sorted.begin(), sorted.end(), Real(0.0));
    std::vector<Real> levels;
    for (const Real f : fractions) {
        Real acc = 0.0;
        Real level = sorted.back();
        for (const Real d : sorted) {
            acc += d;
            if (acc >= f * total) {
                level = d;
                break;
            }
        }
        levels.push_back(level);
    }
    return levels;
}

struct Panel {
    int x0, y0, x1, y1;  // pixel bounds, y grows downward
};

void draw_contour(Canvas& canvas, const Panel& p, const Grid2D& g, Real level, uint8_t r,
                  uint8_t gg, uint8_t b) {
    const int n = g.n;
    auto px = [&](Real gx) {
        return p.x0 + static_cast<int>((gx / (n - 1.0)) * (p.x1 - p.x0));
    };
    auto py = [&](Real gy) {
        return p.y1 - static_cast<int>((gy / (n - 1.0)) * (p.y1 - p.y0));
    };
    auto dens = [&](int xi, int yi) {
        return g.density[static_cast<std::size_t>(yi) * n + xi];
    };
    // Marching squares with linear interpolation on cell edges.
    for (int yi = 0; yi + 1 < n; ++yi) {
        for (int xi = 0; xi + 1 < n; ++xi) {
            const Real v00 = dens(xi, yi), v10 = dens(xi + 1, yi);
            const Real v01 = dens(xi, yi + 1), v11 = dens(xi + 1, yi + 1);
            auto cross = [&](Real a, Real bb) { return (a < level) != (bb < level); };
            std::vector<std::pair<Real, Real>> pts;
            if (cross(v00, v10)) pts.push_back({xi + (level - v00) / (v10 - v00), (Real)yi});
            if (cross(v01, v11)) pts.push_back({xi + (level - v01) / (v11 - v01), yi + 1.0});
            if (cross(v00, v01)) pts.push_back({(Real)xi, yi + (level - v00) / (v01 - v00)});
            if (cross(v10, v11)) pts.push_back({xi + 1.0, yi + (level - v10) / (v11 - v10)});
            if (pts.size() >= 2) {
                canvas.draw_line(px(pts[0].first), py(pts[0].second), px(pts[1].first),
                                 py(pts[1].second), r, gg, b);
            }
            if (pts.size() == 4) {
                canvas.draw_line(px(pts[2].first), py(pts[2].second), px(pts[3].first),
                                 py(pts[3].second), r, gg, b);
            }
        }
    }
}

std::string format_tick(Real v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return std::string(buf);
}

void draw_frame(Canvas& canvas, const Panel& p) {
    canvas.draw_line(p.x0, p.y0, p.x1, p.y0, 0, 0, 0);
    canvas.draw_line(p.x0, p.y1, p.x1, p.y1, 0, 0, 0);
    canvas.draw_line(p.x0, p.y0, p.x0, p.y1, 0, 0, 0);
    canvas.draw_line(p.x1, p.y0, p.x1, p.y1, 0, 0, 0);
}

}  // namespace

Canvas::Canvas(int width, int height) : width_(width), height_(height) {
    pixels_.assign(static_cast<std::size_t>(width) * height * 3, 255);
}

void Canvas::fill(uint8_t r, uint8_t g, uint8_t b) {
    for (std::size_t i = 0; i < pixels_.size(); i += 3) {
        pixels_[i] = r;
        pixels_[i + 1] = g;
        pixels_[i + 2] = b;
    }
}

void Canvas::set_pixel(int x, int y, uint8_t r, uint8_t g, uint8_t b) {
    if (x < 0 || y < 0 || x >= width_ || y >= height_) return;
    const std::size_t idx = (static_cast<std::size_t>(y) * width_ + x) * 3;
    pixels_[idx] = r;
    pixels_[idx + 1] = g;
    pixels_[idx + 2] = b;
}

void Canvas::draw_line(int x0, int y0, int x1, int y1, uint8_t r, uint8_t g, uint8_t b) {
    const int dx = std::abs(x1 - x0), dy = -std::abs(y1 - y0);
    const int sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
    int err = dx + dy;
    while (true) {
        set_pixel(x0, y0, r, g, b);
        if (x0 == x1 && y0 == y1) break;
        const int e2 = 2 * err;
        if (e2 >= dy) {
            err += dy;
            x0 += sx;
        }
        if (e2 <= dx) {
            err += dx;
            y0 += sy;
        }
    }
}

void Canvas::fill_rect(int x0, int y0, int x1, int y1, uint8_t r, uint8_t g, uint8_t b) {
    for (int y = std::max(0, y0); y <= std::min(height_ - 1, y1); ++y) {
        for (int x = std::max(0, x0); x <= std::min(width_ - 1, x1); ++x) {
            set_pixel(x, y, r, g, b);
        }
    }
}

void Canvas::draw_text(int x, int y, const std::string& text, uint8_t r, uint8_t g, uint8_t b,
                       int scale) {
    int cx = x;
    for (const char c : text) {
        const uint8_t* glyph = find_glyph(c);
        if (glyph != nullptr) {
            for (int col = 0; col < 5; ++col) {
                for (int row = 0; row < 7; ++row) {
                    if (glyph[col] & (1 << row)) {
                        for (int sy = 0; sy < scale; ++sy) {
                            for (int sx = 0; sx < scale; ++sx) {
                                set_pixel(cx + col * scale + sx, y + row * scale + sy, r, g, b);
                            }
                        }
                    }
                }
            }
        }
        cx += 6 * scale;
    }
}

void Canvas::save_png(const std::string& path) const {
    std::vector<uint8_t> raw;
    raw.reserve(static_cast<std::size_t>(height_) * (width_ * 3 + 1));
    for (int y = 0; y < height_; ++y) {
        raw.push_back(0);  // filter: none
        const std::size_t row = static_cast<std::size_t>(y) * width_ * 3;
        raw.insert(raw.end(), pixels_.begin() + row, pixels_.begin() + row + width_ * 3);
    }

    // zlib stream with stored deflate blocks.
    std::vector<uint8_t> z;
    z.push_back(0x78);
    z.push_back(0x01);
    std::size_t off = 0;
    while (off < raw.size()) {
        const std::size_t len = std::min<std::size_t>(65535, raw.size() - off);
        const bool final = off + len == raw.size();
        z.push_back(final ? 1 : 0);
        z.push_back(static_cast<uint8_t>(len & 0xff));
        z.push_back(static_cast<uint8_t>(len >> 8));
        z.push_back(static_cast<uint8_t>(~len & 0xff));
        z.push_back(static_cast<uint8_t>((~len >> 8) & 0xff));
        z.insert(z.end(), raw.begin() + off, raw.begin() + off + len);
        off += len;
    }
    uint32_t a = 1, bsum = 0;
    for (const uint8_t byte : raw) {
        a = (a + byte) % 65521;
        bsum = (bsum + a) % 65521;
    }
    push_u32(z, (bsum << 16) | a);

    std::vector<uint8_t> png{0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};
    std::vector<uint8_t> ihdr;
    push_u32(ihdr, static_cast<uint32_t>(width_));
    push_u32(ihdr, static_cast<uint32_t>(height_));
    ihdr.push_back(8);  // bit depth
    ihdr.push_back(2);  // truecolor
    ihdr.push_back(0);
    ihdr.push_back(0);
    ihdr.push_back(0);
    push_chunk(png, "IHDR", ihdr);
    push_chunk(png, "IDAT", z);
    push_chunk(png, "IEND", {});

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("save_png: cannot create " + path);
    out.write(reinterpret_cast<const char*>(png.data()),
              static_cast<std::streamsize>(png.size()));
}

void corner_plot(const std::vector<simulator::TerrainParams>& samples,
                 const std::string& path) {
    if (samples.empty()) throw std::invalid_argument("corner_plot: no samples");
    const std::array<std::string, 3> labels{"eps", "sigma (m)", "slope"};
    std::array<std::vector<Real>, 3> cols;
    for (auto& c : cols) c.reserve(samples.size());
    for (const auto& s : samples) {
        cols[0].push_back(s.eps);
        cols[1].push_back(s.sigma);
        cols[2].push_back(s.slope);
    }

    const int panel = 230, margin = 56, gap = 14;
    const int size = margin + 3 * panel + 2 * gap + 20;
    Canvas canvas(size, size);

    auto panel_rect = [&](int row, int col) {
        Panel p;
        p.x0 = margin + col * (panel + gap);
        p.y0 = 20 + row * (panel + gap);
        p.x1 = p.x0 + panel;
        p.y1 = p.y0 + panel;
        return p;
    };

    for (int row = 0; row < 3; ++row) {
        for (int col = 0; col <= row; ++col) {
            const Panel p = panel_rect(row, col);
            if (row == col) {
                // 1-D marginal via binned KDE.
                const auto& v = cols[col];
                const auto [lo_it, hi_it] = std::minmax_element(v.begin(), v.end());
                const Real pad = std::max(1e-12, 0.08 * (*hi_it - *lo_it));
                const Real lo = *lo_it - pad, hi = *hi_it + pad;
                const int nb = 160;
                std::vector<Real> hist(nb, 0.0);
                for (const Real x : v) {
                    const int b =
                        std::clamp(static_cast<int>((x - lo) / (hi - lo) * nb), 0, nb - 1);
                    hist[b] += 1.0;
                }
                gaussian_blur_1d(hist, silverman_bandwidth(v) / ((hi - lo) / nb));
                const Real peak = *std::max_element(hist.begin(), hist.end());
                int prev_x = p.x0, prev_y = p.y1;
                for (int b = 0; b < nb; ++b) {
                    const int x = p.x0 + b * panel / nb;
                    const int y = p.y1 - static_cast<int>(hist[b] / peak * (panel - 12));
                    canvas.draw_line(prev_x, prev_y, x, y, 30, 60, 160);
                    prev_x = x;
                    prev_y = y;
                }
                draw_frame(canvas, p);
                canvas.draw_text(p.x0, p.y0 - 10, labels[col], 0, 0, 0);
                canvas.draw_text(p.x0, p.y1 + 4, format_tick(lo), 90, 90, 90);
                canvas.draw_text(p.x1 - 30, p.y1 + 4, format_tick(hi), 90, 90, 90);
            } else {
                const Grid2D g = kde_2d(cols[col], cols[row], 96);
                const Real peak = *std::max_element(g.density.begin(), g.density.end());
                for (int yi = 0; yi < g.n; ++yi) {
                    for (int xi = 0; xi < g.n; ++xi) {
                        const Real d = g.density[static_cast<std::size_t>(yi) * g.n + xi] / peak;
                        if (d <= 0.003) continue;
                        const Real t = std::pow(d, 0.5);
                        const auto shade = [&](Real base) {
                            return static_cast<uint8_t>(255.0 - t * (255.0 - base));
                        };
                        const int px = p.x0 + xi * panel / g.n;
                        const int py = p.y1 - yi * panel / g.n;
                        canvas.fill_rect(px, py - panel / g.n, px + panel / g.n, py, shade(40),
                                         shade(80), shade(170));
                    }
                }
                const auto levels = mass_levels(g.density, {0.5, 0.8, 0.95});
                for (const Real level : levels) draw_contour(canvas, p, g, level, 10, 10, 60);
                draw_frame(canvas, p);
                canvas.draw_text(p.x0, p.y1 + 4, format_tick(g.x_lo), 90, 90, 90);
                canvas.draw_text(p.x1 - 30, p.y1 + 4, format_tick(g.x_hi), 90, 90, 90);
                if (col == 0) {
                    canvas.draw_text(4, p.y0 + 4, labels[row], 0, 0, 0);
                    canvas.draw_text(4, (p.y0 + p.y1) / 2, format_tick(g.y_lo), 90, 90, 90);
                }
                if (row == 2) {
                    canvas.draw_text(p.x0 + panel / 2 - 12, p.y1 + 12, labels[col], 0, 0, 0);
                }
            }
        }
    }
    canvas.save_png(path);
}

void rank_histogram(const std::array<calibration::RankRecord, 3>& ranks,
                    const std::string& path) {
    const std::array<std::string, 3> labels{"eps", "sigma", "slope"};
    const int panel_w = 260, panel_h = 200, margin = 40, gap = 24;
    Canvas canvas(margin + 3 * (panel_w + gap), panel_h + 70);

    for (int d = 0; d < 3; ++d) {
        const auto& rec = ranks[d];
        if (rec.ranks.empty()) continue;
        const int nb = 20;
        std::vector<Real> hist(nb, 0.0);
        for (const int r : rec.ranks) {
            const int b = std::clamp(r * nb / (rec.L + 1), 0, nb - 1);
            hist[b] += 1.0;
        }
        const Real expected = static_cast<Real>(rec.ranks.size()) / nb;
        const Real band = 3.0 * std::sqrt(expected * (1.0 - 1.0 / nb));
        const Real peak =
            std::max(*std::max_element(hist.begin(), hist.end()), expected + band) * 1.1;

        Panel p;
        p.x0 = margin + d * (panel_w + gap);
        p.y0 = 24;
        p.x1 = p.x0 + panel_w;
        p.y1 = p.y0 + panel_h;

        auto ybar = [&](Real v) { return p.y1 - static_cast<int>(v / peak * panel_h); };
        for (int b = 0; b < nb; ++b) {
            const int x0 = p.x0 + b * panel_w / nb + 1;
            const int x1 = p.x0 + (b + 1) * panel_w / nb - 1;
            canvas.fill_rect(x0, ybar(hist[b]), x1, p.y1, 120, 150, 210);
        }
        // Uniform expectation and +-3 sigma band.
        canvas.draw_line(p.x0, ybar(expected), p.x1, ybar(expected), 30, 30, 30);
        canvas.draw_line(p.x0, ybar(expected + band), p.x1, ybar(expected + band), 150, 150,
                         150);
        canvas.draw_line(p.x0, ybar(std::max(0.0, expected - band)), p.x1,
                         ybar(std::max(0.0, expected - band)), 150, 150, 150);
        draw_frame(canvas, p);
        canvas.draw_text(p.x0, p.y0 - 12, labels[d] + " rank", 0, 0, 0);
        canvas.draw_text(p.x0, p.y1 + 6, "0", 90, 90, 90);
        canvas.draw_text(p.x1 - 24, p.y1 + 6, format_tick(rec.L), 90, 90, 90);
    }
    canvas.save_png(path);
}

}  // namespace rsnpe::plot
