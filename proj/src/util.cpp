#include "flowkit/util.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <thread>
#include <vector>

namespace flowkit {

std::string to_lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::string hex_code(uint32_t value) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "0x%04x", value);
    return buf;
}

void parallel_for(size_t n, const std::function<void(size_t, size_t)>& fn) {
    if (n == 0) return;
    size_t workers = std::min<size_t>(std::max(1u, std::thread::hardware_concurrency()), n);
    if (workers <= 1) {
        fn(0, n);
        return;
    }
    size_t chunk = (n + workers - 1) / workers;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (size_t w = 0; w < workers; ++w) {
        size_t begin = w * chunk;
        size_t end = std::min(n, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&fn, begin, end] { fn(begin, end); });
    }
    for (auto& t : pool) t.join();
}

}  // namespace flowkit
