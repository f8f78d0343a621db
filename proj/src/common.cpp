#include "rsnpe/common.hpp"

#include <algorithm>
#include <cstdio>

namespace rsnpe {

void parallel_chunks(std::size_t n, std::size_t chunk,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& fn) {
    if (n == 0) return;
    const std::size_t nchunks = num_chunks(n, chunk);
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    const std::size_t nthreads = std::min<std::size_t>(hw, nchunks);
    if (nthreads <= 1) {
        for (std::size_t c = 0; c < nchunks; ++c) {
            fn(c * chunk, std::min(n, (c + 1) * chunk), c);
        }
        return;
    }
    std::vector<std::thread> workers;
    workers.reserve(nthreads);
    std::vector<std::exception_ptr> errors(nthreads);
    for (std::size_t t = 0; t < nthreads; ++t) {
        workers.emplace_back([&, t]() {
            try {
                for (std::size_t c = t; c < nchunks; c += nthreads) {
                    fn(c * chunk, std::min(n, (c + 1) * chunk), c);
                }
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& w : workers) w.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

std::string to_hex(uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return std::string(buf);
}

}  // namespace rsnpe
