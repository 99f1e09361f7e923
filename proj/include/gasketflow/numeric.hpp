#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace gasketflow {

// Neumaier's variant of Kahan summation.
class CompensatedSum {
public:
    void add(double x) noexcept {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }
    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline double compensated_sum(std::span<const double> xs) noexcept {
    CompensatedSum acc;
    for (double x : xs) acc.add(x);
    return acc.value();
}

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Value in [0, +inf] produced by energies and boundary functionals.
// Infinity is a first-class state, never a sentinel for failure.
class Extended {
public:
    constexpr Extended() = default;
    constexpr explicit Extended(double v) : value_(v) {}

    static constexpr Extended infinity() { return Extended(kInfinity); }

    constexpr bool is_infinite() const { return value_ == kInfinity; }
    constexpr bool is_finite() const { return value_ != kInfinity; }
    constexpr double value() const { return value_; }

    friend constexpr Extended operator+(Extended a, Extended b) {
        if (a.is_infinite() || b.is_infinite()) return infinity();
        return Extended(a.value_ + b.value_);
    }
    Extended& operator+=(Extended other) { return *this = *this + other; }

    friend constexpr bool operator==(Extended a, Extended b) = default;

private:
    double value_ = 0.0;
};

// a <= b in [0, inf] with slack `tol` on finite values: x <= inf always,
// inf <= inf holds, inf <= finite never holds.
inline bool extended_leq(Extended a, Extended b, double tol) {
    if (b.is_infinite()) return true;
    if (a.is_infinite()) return false;
    return a.value() <= b.value() + tol;
}

// Difference a - b with the convention inf - inf = inf.
inline double extended_diff(Extended a, Extended b) {
    if (a.is_infinite()) return kInfinity;
    if (b.is_infinite()) return -kInfinity;
    return a.value() - b.value();
}

// Sign with sgn(0) = 0.
inline double sgn(double x) noexcept { return (x > 0.0) - (x < 0.0); }

// SplitMix64 seeded PRNG. Output is identical on every platform, unlike the
// standard distributions whose algorithms are implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() noexcept {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) noexcept { return next_u64() % n; }

    bool coin() noexcept { return (next_u64() >> 63) != 0; }

    // Independent stream for sample `index`, used to keep parallel runs
    // identical to sequential ones.
    static Rng stream(std::uint64_t seed, std::uint64_t index) {
        Rng mix(seed ^ (index * 0xD1B54A32D192ED03ULL + 0x8CB92BA72F3D8DD7ULL));
        return Rng(mix.next_u64());
    }

private:
    std::uint64_t state_;
};

}  // namespace gasketflow
