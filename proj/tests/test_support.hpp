#pragma once

#include <cstdint>

#include "modest/interval.hpp"

namespace testsup {

using modest::Mat;
using modest::Vec;

// deterministic generator for property tests
class Gen {
  public:
    explicit Gen(std::uint64_t seed) : state_(seed) {}
    std::uint64_t u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    double uniform(double lo, double hi) {
        return lo + (hi - lo) * (static_cast<double>(u64() >> 11) * 0x1.0p-53);
    }
    int uniform_int(int lo, int hi) {  // inclusive
        return lo + static_cast<int>(u64() % static_cast<std::uint64_t>(hi - lo + 1));
    }
    Mat matrix(Eigen::Index r, Eigen::Index c, double lo = -1.0, double hi = 1.0) {
        Mat m(r, c);
        for (Eigen::Index i = 0; i < r; ++i)
            for (Eigen::Index j = 0; j < c; ++j) m(i, j) = uniform(lo, hi);
        return m;
    }
    Vec vector(Eigen::Index n, double lo = -1.0, double hi = 1.0) {
        Vec v(n);
        for (Eigen::Index i = 0; i < n; ++i) v(i) = uniform(lo, hi);
        return v;
    }
    modest::IntervalVector box(Eigen::Index n, double center_range = 1.0,
                               double max_width = 1.0) {
        Vec lo(n), hi(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double c = uniform(-center_range, center_range);
            const double w = uniform(0.0, max_width);
            lo(i) = c - 0.5 * w;
            hi(i) = c + 0.5 * w;
        }
        return {lo, hi};
    }
    modest::IntervalMatrix interval_matrix(Eigen::Index r, Eigen::Index c,
                                           double center_range = 1.0, double max_width = 1.0) {
        Mat lo(r, c), hi(r, c);
        for (Eigen::Index i = 0; i < r; ++i) {
            for (Eigen::Index j = 0; j < c; ++j) {
                const double m = uniform(-center_range, center_range);
                const double w = uniform(0.0, max_width);
                lo(i, j) = m - 0.5 * w;
                hi(i, j) = m + 0.5 * w;
            }
        }
        return {lo, hi};
    }

  private:
    std::uint64_t state_;
};

}  // namespace testsup
