#include "rsnpe/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace rsnpe::io {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
}

std::ifstream open_or_throw(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return in;
}

std::ofstream create_or_throw(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot create " + path);
    return out;
}

void expect_header(std::ifstream& in, const std::string& expected, const std::string& path) {
    std::string header;
    if (!std::getline(in, header) || header != expected) {
        throw std::runtime_error(path + ": expected header '" + expected + "'");
    }
}

}  // namespace

std::string format_real(Real v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
}

void write_primary_csv(const std::string& path, const std::vector<datagen::PrimaryRecord>& recs) {
    auto out = create_or_throw(path);
    out << "eps,sigma,slope,p_linear,seed\n";
    for (const auto& r : recs) {
        out << format_real(r.theta.eps) << ',' << format_real(r.theta.sigma) << ','
            << format_real(r.theta.slope) << ',' << format_real(r.p) << ',' << r.seed << '\n';
    }
}

std::vector<datagen::PrimaryRecord> read_primary_csv(const std::string& path) {
    auto in = open_or_throw(path);
    expect_header(in, "eps,sigma,slope,p_linear,seed", path);
    std::vector<datagen::PrimaryRecord> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split_line(line);
        if (cells.size() != 5) throw std::runtime_error(path + ": malformed row '" + line + "'");
        datagen::PrimaryRecord r;
        r.theta.eps = std::stod(cells[0]);
        r.theta.sigma = std::stod(cells[1]);
        r.theta.slope = std::stod(cells[2]);
        r.p = std::stod(cells[3]);
        r.seed = std::stoull(cells[4]);
        out.push_back(r);
    }
    return out;
}

void write_reference_csv(const std::string& path, const std::vector<datagen::RefRecord>& recs) {
    auto out = create_or_throw(path);
    out << "eps_ref,p_ref_linear,seed\n";
    for (const auto& r : recs) {
        out << format_real(r.eps_ref) << ',' << format_real(r.p_ref) << ',' << r.seed << '\n';
    }
}

std::vector<datagen::RefRecord> read_reference_csv(const std::string& path) {
    auto in = open_or_throw(path);
    expect_header(in, "eps_ref,p_ref_linear,seed", path);
    std::vector<datagen::RefRecord> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split_line(line);
        if (cells.size() != 3) throw std::runtime_error(path + ": malformed row '" + line + "'");
        out.push_back(datagen::RefRecord{std::stod(cells[0]), std::stod(cells[1]),
                                         std::stoull(cells[2])});
    }
    return out;
}

void write_pairs_csv(const std::string& path, const std::vector<datagen::TrainSample>& pairs) {
    auto out = create_or_throw(path);
    out << "eps,sigma,slope,h\n";
    for (const auto& p : pairs) {
        out << format_real(p.theta.eps) << ',' << format_real(p.theta.sigma) << ','
            << format_real(p.theta.slope) << ',' << format_real(p.h) << '\n';
    }
}

std::vector<datagen::TrainSample> read_pairs_csv(const std::string& path) {
    auto in = open_or_throw(path);
    expect_header(in, "eps,sigma,slope,h", path);
    std::vector<datagen::TrainSample> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split_line(line);
        if (cells.size() != 4) throw std::runtime_error(path + ": malformed row '" + line + "'");
        datagen::TrainSample s;
        s.theta.eps = std::stod(cells[0]);
        s.theta.sigma = std::stod(cells[1]);
        s.theta.slope = std::stod(cells[2]);
        s.h = std::stod(cells[3]);
        out.push_back(s);
    }
    return out;
}

void write_history_csv(const std::string& path, const std::vector<flow::EpochStats>& history) {
    auto out = create_or_throw(path);
    out << "epoch,train_nll,val_nll\n";
    for (const auto& e : history) {
        out << e.epoch << ',' << format_real(e.train_nll) << ',' << format_real(e.val_nll)
            << '\n';
    }
}

void write_rank_csv(const std::string& path, const std::vector<int>& ranks_eps,
                    const std::vector<int>& ranks_sigma, const std::vector<int>& ranks_slope,
                    int L) {
    auto out = create_or_throw(path);
    out << "rank_eps,rank_sigma,rank_slope,L\n";
    for (std::size_t i = 0; i < ranks_eps.size(); ++i) {
        out << ranks_eps[i] << ',' << ranks_sigma[i] << ',' << ranks_slope[i] << ',' << L << '\n';
    }
}

void write_samples_csv(const std::string& path,
                       const std::vector<simulator::TerrainParams>& samples) {
    auto out = create_or_throw(path);
    out << "eps,sigma,slope\n";
    for (const auto& s : samples) {
        out << format_real(s.eps) << ',' << format_real(s.sigma) << ',' << format_real(s.slope)
            << '\n';
    }
}

std::vector<simulator::TerrainParams> read_samples_csv(const std::string& path) {
    auto in = open_or_throw(path);
    expect_header(in, "eps,sigma,slope", path);
    std::vector<simulator::TerrainParams> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split_line(line);
        if (cells.size() != 3) throw std::runtime_error(path + ": malformed row '" + line + "'");
        out.push_back(simulator::TerrainParams{std::stod(cells[0]), std::stod(cells[1]),
                                               std::stod(cells[2])});
    }
    return out;
}

void write_mesh(const std::string& base_path, const surface::SurfaceMesh& mesh, uint64_t seed) {
    {
        std::ofstream bin(base_path + ".bin", std::ios::binary);
        if (!bin) throw std::runtime_error("cannot create " + base_path + ".bin");
        bin.write(reinterpret_cast<const char*>(mesh.heights.data()),
                  static_cast<std::streamsize>(mesh.heights.size() * sizeof(Real)));
    }
    nlohmann::json j;
    j["n"] = mesh.n;
    j["dx_m"] = mesh.dx;
    j["seed"] = seed;
    j["layout"] = "row-major float64 heights, meters";
    write_text_file(base_path + ".json", j.dump(2) + "\n");
}

void write_rangeline(const std::string& base_path, const simulator::Rangeline& line,
                     const simulator::TerrainParams& theta, uint64_t seed,
                     const std::string& config_hash) {
    {
        std::ofstream bin(base_path + ".bin", std::ios::binary);
        if (!bin) throw std::runtime_error("cannot create " + base_path + ".bin");
        for (const auto& s : line.samples) {
            const Real re = s.real(), im = s.imag();
            bin.write(reinterpret_cast<const char*>(&re), sizeof(Real));
            bin.write(reinterpret_cast<const char*>(&im), sizeof(Real));
        }
    }
    nlohmann::json j;
    j["n_s"] = line.samples.size();
    j["dt_s"] = line.dt;
    j["t0_s"] = line.t0;
    j["seed"] = seed;
    j["theta"] = {{"eps", theta.eps}, {"sigma", theta.sigma}, {"slope", theta.slope}};
    j["config_hash"] = config_hash;
    j["layout"] = "interleaved re/im float64";
    write_text_file(base_path + ".json", j.dump(2) + "\n");
}

std::string read_text_file(const std::string& path) {
    auto in = open_or_throw(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    auto out = create_or_throw(path);
    out << content;
}

}  // namespace rsnpe::io
