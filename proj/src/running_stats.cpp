#include "qho/running_stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qho/errors.hpp"

namespace qho {

RunningStats::RunningStats(HistogramSpec spec) : spec_(spec) {
    if (spec_.bins == 0 || !(spec_.hi > spec_.lo)) {
        throw DomainError("histogram needs at least one bin and hi > lo");
    }
    counts_.assign(spec_.bins + 2, 0);
}

void RunningStats::push(double x) {
    ++count_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(count_);
    const double term = delta * (x - mean_);
    const double sum = m2_ + term;
    if (std::abs(m2_) >= std::abs(term)) {
        m2_comp_ += (m2_ - sum) + term;
    } else {
        m2_comp_ += (term - sum) + m2_;
    }
    m2_ = sum;
    ++counts_[bin_index(x)];
}

void RunningStats::merge(const RunningStats& other) {
    if (!(other.spec_ == spec_)) {
        throw DomainError("cannot merge stats with different histogram edges");
    }
    if (other.count_ == 0) {
        return;
    }
    if (count_ == 0) {
        *this = other;
        return;
    }
    const double na = static_cast<double>(count_);
    const double nb = static_cast<double>(other.count_);
    const double n = na + nb;
    const double delta = other.mean_ - mean_;
    const double m2a = m2_ + m2_comp_;
    const double m2b = other.m2_ + other.m2_comp_;
    m2_ = m2a + m2b + delta * delta * na * nb / n;
    m2_comp_ = 0.0;
    mean_ = mean_ + delta * nb / n;
    count_ += other.count_;
    for (std::size_t i = 0; i < counts_.size(); ++i) {
        counts_[i] += other.counts_[i];
    }
}

double RunningStats::variance() const {
    if (count_ < 2) {
        return 0.0;
    }
    return std::max(0.0, (m2_ + m2_comp_) / static_cast<double>(count_ - 1));
}

double RunningStats::std_dev() const { return std::sqrt(variance()); }

double RunningStats::population_variance() const {
    if (count_ == 0) {
        return 0.0;
    }
    return std::max(0.0, (m2_ + m2_comp_) / static_cast<double>(count_));
}

double RunningStats::bin_width() const { return (spec_.hi - spec_.lo) / static_cast<double>(spec_.bins); }

std::uint64_t RunningStats::histogram_total() const {
    return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
}

std::size_t RunningStats::bin_index(double x) const {
    if (!(x >= spec_.lo)) {
        return 0;
    }
    if (!(x < spec_.hi)) {
        return spec_.bins + 1;
    }
    auto i = static_cast<std::size_t>((x - spec_.lo) / bin_width());
    if (i >= spec_.bins) {
        i = spec_.bins - 1;
    }
    return i + 1;
}

}  // namespace qho
