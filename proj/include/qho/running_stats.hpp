#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace qho {

// Uniform bins on [lo, hi) plus one underflow and one overflow bin.
struct HistogramSpec {
    double lo = -1.0;
    double hi = 1.0;
    std::size_t bins = 200;

    bool operator==(const HistogramSpec&) const = default;
};

// Streaming count / mean / variance with a fixed-bin histogram.
//
// Updates follow Welford; the sum of squared deviations carries a Neumaier
// compensation term so that 1e7+ pushes do not drift. merge() is the exact
// pairwise combination (Chan et al.), so stats built on split data and merged
// equal the stats of the concatenated data up to rounding.
class RunningStats {
public:
    explicit RunningStats(HistogramSpec spec = {});

    void push(double x);
    void merge(const RunningStats& other);

    std::uint64_t count() const { return count_; }
    double mean() const { return mean_; }
    // Unbiased (n - 1) sample variance; 0 when fewer than two samples.
    double variance() const;
    double std_dev() const;
    // Population (n) variance; 0 when empty.
    double population_variance() const;

    const HistogramSpec& histogram_spec() const { return spec_; }
    double bin_width() const;
    // counts()[0] is underflow, counts()[bins + 1] overflow.
    const std::vector<std::uint64_t>& counts() const { return counts_; }
    std::uint64_t histogram_total() const;

private:
    std::size_t bin_index(double x) const;

    HistogramSpec spec_;
    std::uint64_t count_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
    double m2_comp_ = 0.0;
    std::vector<std::uint64_t> counts_;
};

}  // namespace qho
