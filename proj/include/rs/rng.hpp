#pragma once
#include <cmath>
#include <cstdint>
#include <random>

namespace rs {

/// splitmix64 step: advances `state` and returns the next output word.
/// Used only for seed derivation, never as the sampling generator itself.
inline std::uint64_t splitmix64(std::uint64_t& state) {
	state += 0x9E3779B97F4A7C15ull;
	std::uint64_t z = state;
	z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
	z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
	return z ^ (z >> 31);
}

/// Independent generator for substream `index` of a master seed. Distinct
/// indices give decorrelated streams regardless of how many draws each
/// consumes, so batches and tasks can be seeded without coordination.
inline std::mt19937_64 seeded_stream(std::uint64_t master, std::uint64_t index) {
	std::uint64_t s = master ^ (0xD1B54A32D192ED03ull * (index + 1));
	const std::uint64_t a = splitmix64(s);
	const std::uint64_t b = splitmix64(s);
	const std::uint64_t c = splitmix64(s);
	const std::uint64_t d = splitmix64(s);
	std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
	                  static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32),
	                  static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(c >> 32),
	                  static_cast<std::uint32_t>(d), static_cast<std::uint32_t>(d >> 32)};
	return std::mt19937_64(seq);
}

/// Streaming mean / variance accumulator (Welford). `stderr_of_mean` is the
/// usual s / sqrt(n) estimate.
class RunningStats {
public:
	void push(double x) {
		++n_;
		const double d = x - mean_;
		mean_ += d / static_cast<double>(n_);
		m2_ += d * (x - mean_);
		const double x2 = x * x;
		sum2_ += x2;
		sum4_ += x2 * x2;
	}
	std::int64_t count() const { return n_; }
	double mean() const { return mean_; }
	double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
	double stderr_of_mean() const {
		return n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
	}
	/// Raw moments E[x^2], E[x^4] of the pushed values.
	double raw2() const { return n_ > 0 ? sum2_ / static_cast<double>(n_) : 0.0; }
	double raw4() const { return n_ > 0 ? sum4_ / static_cast<double>(n_) : 0.0; }

private:
	std::int64_t n_ = 0;
	double mean_ = 0.0;
	double m2_ = 0.0;
	double sum2_ = 0.0;
	double sum4_ = 0.0;
};

} // namespace rs
