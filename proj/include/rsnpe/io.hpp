#pragma once

#include <string>
#include <vector>

#include "rsnpe/common.hpp"
#include "rsnpe/datagen.hpp"
#include "rsnpe/flow.hpp"
#include "rsnpe/simulator.hpp"
#include "rsnpe/surface.hpp"

namespace rsnpe::io {

/// Doubles are formatted with 17 significant digits so reruns with the same
/// seeds produce byte-identical CSV files and values round-trip exactly.
std::string format_real(Real v);

void write_primary_csv(const std::string& path, const std::vector<datagen::PrimaryRecord>& recs);
std::vector<datagen::PrimaryRecord> read_primary_csv(const std::string& path);

void write_reference_csv(const std::string& path, const std::vector<datagen::RefRecord>& recs);
std::vector<datagen::RefRecord> read_reference_csv(const std::string& path);

void write_pairs_csv(const std::string& path, const std::vector<datagen::TrainSample>& pairs);
std::vector<datagen::TrainSample> read_pairs_csv(const std::string& path);

void write_history_csv(const std::string& path, const std::vector<flow::EpochStats>& history);

void write_rank_csv(const std::string& path, const std::vector<int>& ranks_eps,
                    const std::vector<int>& ranks_sigma, const std::vector<int>& ranks_slope,
                    int L);

void write_samples_csv(const std::string& path,
                       const std::vector<simulator::TerrainParams>& samples);
std::vector<simulator::TerrainParams> read_samples_csv(const std::string& path);

/// Flat binary height grid (row-major float64) with a JSON header alongside.
void write_mesh(const std::string& base_path, const surface::SurfaceMesh& mesh, uint64_t seed);

/// Interleaved re/im float64 samples with a JSON header carrying n_s, dt, t0,
/// seed, theta and the config hash.
void write_rangeline(const std::string& base_path, const simulator::Rangeline& line,
                     const simulator::TerrainParams& theta, uint64_t seed,
                     const std::string& config_hash);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace rsnpe::io
