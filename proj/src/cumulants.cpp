#include "rs/cumulants.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "rs/errors.hpp"
#include "rs/rng.hpp"

namespace rs {

namespace {

void require_canonical(const std::vector<int>& s, const char* who) {
	for (std::size_t i = 0; i + 1 < s.size(); ++i)
		if (s[i] >= s[i + 1])
			throw std::invalid_argument(std::string(who) + ": index set must be sorted and duplicate-free");
}

void grow(int i, int n, int next_block, std::vector<int>& a, std::vector<Partition>& out) {
	if (i == n) {
		Partition p(static_cast<std::size_t>(next_block));
		for (int j = 0; j < n; ++j) p[static_cast<std::size_t>(a[static_cast<std::size_t>(j)])].push_back(j);
		out.push_back(std::move(p));
		return;
	}
	for (int v = 0; v <= next_block; ++v) {
		a[static_cast<std::size_t>(i)] = v;
		grow(i + 1, n, std::max(next_block, v + 1), a, out);
	}
}

std::vector<int> tuple_from_mask(unsigned mask, const std::vector<int>& ground) {
	std::vector<int> out;
	for (std::size_t i = 0; i < ground.size(); ++i)
		if (mask & (1u << i)) out.push_back(ground[i]);
	return out;
}

} // namespace

std::vector<Partition> enumerate_partitions(int n) {
	if (n < 0) throw std::invalid_argument("enumerate_partitions: negative ground set");
	if (n > 12)
		throw BudgetExceeded("enumerate_partitions: n = " + std::to_string(n) + " exceeds the Bell-number budget (n <= 12)");
	std::vector<Partition> out;
	if (n == 0) {
		out.emplace_back();
		return out;
	}
	std::vector<int> a(static_cast<std::size_t>(n), 0);
	grow(0, n, 0, a, out);
	return out;
}

CumulantSpec::CumulantSpec(std::map<std::vector<int>, Rational> kappa) : kappa_(std::move(kappa)) {
	for (const auto& [subset, value] : kappa_) {
		(void)value;
		require_canonical(subset, "CumulantSpec");
	}
}

CumulantSpec CumulantSpec::gaussian(int n, const Rational& variance) {
	std::map<std::vector<int>, Rational> kappa;
	std::vector<int> ground(static_cast<std::size_t>(n));
	for (int i = 0; i < n; ++i) ground[static_cast<std::size_t>(i)] = i;
	for (unsigned mask = 1; mask < (1u << n); ++mask) {
		std::vector<int> s = tuple_from_mask(mask, ground);
		kappa[s] = s.size() == 2 ? variance : Rational(0);
	}
	return CumulantSpec(std::move(kappa));
}

CumulantSpec CumulantSpec::poisson(int n, const Rational& lambda) {
	std::map<std::vector<int>, Rational> kappa;
	std::vector<int> ground(static_cast<std::size_t>(n));
	for (int i = 0; i < n; ++i) ground[static_cast<std::size_t>(i)] = i;
	for (unsigned mask = 1; mask < (1u << n); ++mask) kappa[tuple_from_mask(mask, ground)] = lambda;
	return CumulantSpec(std::move(kappa));
}

const Rational& CumulantSpec::cumulant(const std::vector<int>& subset) const {
	require_canonical(subset, "CumulantSpec::cumulant");
	auto it = kappa_.find(subset);
	if (it == kappa_.end()) {
		std::string key;
		for (int i : subset) key += std::to_string(i) + " ";
		throw MissingCumulant("cumulant table has no entry for subset { " + key + "}");
	}
	return it->second;
}

Rational moments_from_cumulants(const CumulantSpec& spec, const std::vector<int>& B) {
	require_canonical(B, "moments_from_cumulants");
	const int n = static_cast<int>(B.size());
	Rational total(0);
	for (const Partition& pi : enumerate_partitions(n)) {
		Rational prod(1);
		for (const std::vector<int>& block : pi) {
			std::vector<int> indices;
			indices.reserve(block.size());
			for (int pos : block) indices.push_back(B[static_cast<std::size_t>(pos)]);
			prod = prod * spec.cumulant(indices);
			if (prod.is_zero()) break;
		}
		total = total + prod;
	}
	return total;
}

Rational cumulants_from_moments(const std::map<std::vector<int>, Rational>& moments,
                                const std::vector<int>& B) {
	require_canonical(B, "cumulants_from_moments");
	const int n = static_cast<int>(B.size());
	auto moment = [&moments](const std::vector<int>& s) -> const Rational& {
		auto it = moments.find(s);
		if (it == moments.end()) {
			std::string key;
			for (int i : s) key += std::to_string(i) + " ";
			throw MissingMoment("moment table has no entry for subset { " + key + "}");
		}
		return it->second;
	};
	Rational total(0);
	for (const Partition& pi : enumerate_partitions(n)) {
		Rational prod(1);
		for (const std::vector<int>& block : pi) {
			std::vector<int> indices;
			indices.reserve(block.size());
			for (int pos : block) indices.push_back(B[static_cast<std::size_t>(pos)]);
			prod = prod * moment(indices);
		}
		const int nb = static_cast<int>(pi.size());
		Rational sign((nb - 1) % 2 == 0 ? 1 : -1);
		total = total + sign * factorial(nb - 1) * prod;
	}
	return total;
}

WickExpansion wick_decompose(const std::vector<int>& A, const CumulantSpec& spec) {
	require_canonical(A, "wick_decompose");
	const int n = static_cast<int>(A.size());
	if (n > 12) throw BudgetExceeded("wick_decompose: ground set larger than 12");
	WickExpansion out;
	for (unsigned mask = 0; mask < (1u << n); ++mask) {
		const unsigned rest = ((1u << n) - 1u) & ~mask;
		Rational c = moments_from_cumulants(spec, tuple_from_mask(rest, A));
		if (!c.is_zero()) out[tuple_from_mask(mask, A)] = c;
	}
	return out;
}

WickExpansion wick_as_ordinary(const std::vector<int>& A, const CumulantSpec& spec) {
	require_canonical(A, "wick_as_ordinary");
	const int n = static_cast<int>(A.size());
	if (n > 12) throw BudgetExceeded("wick_as_ordinary: ground set larger than 12");
	const unsigned full = (1u << n) - 1u;
	// moment of each sub-tuple, then triangular inversion ascending in set size
	std::vector<Rational> mom(full + 1u);
	for (unsigned mask = 0; mask <= full; ++mask)
		mom[mask] = moments_from_cumulants(spec, tuple_from_mask(mask, A));
	std::vector<std::map<unsigned, Rational>> w(full + 1u);
	std::vector<unsigned> order(full + 1u);
	for (unsigned mask = 0; mask <= full; ++mask) order[mask] = mask;
	std::sort(order.begin(), order.end(), [](unsigned a, unsigned b) {
		const int pa = __builtin_popcount(a), pb = __builtin_popcount(b);
		return pa != pb ? pa < pb : a < b;
	});
	for (unsigned mask : order) {
		std::map<unsigned, Rational>& acc = w[mask];
		acc[mask] = Rational(1);
		if (mask == 0) continue;
		// subtract E[X^{mask\sub}] :X_sub: for every proper subset, unfolding
		// the already-inverted w[sub]
		unsigned sub = (mask - 1u) & mask;
		for (;;) {
			const Rational& m = mom[mask & ~sub];
			if (!m.is_zero()) {
				for (const auto& [inner, c] : w[sub]) {
					Rational& slot = acc[inner];
					slot = slot - m * c;
					if (slot.is_zero()) acc.erase(inner);
				}
			}
			if (sub == 0) break;
			sub = (sub - 1u) & mask;
		}
	}
	WickExpansion out;
	for (const auto& [mask, c] : w[full]) out[tuple_from_mask(mask, A)] = c;
	return out;
}

Rational wick_expectation(const std::vector<int>& A, const CumulantSpec& spec) {
	Rational total(0);
	for (const auto& [tuple, c] : wick_as_ordinary(A, spec))
		total = total + c * moments_from_cumulants(spec, tuple);
	return total;
}

Rational wick_pair_expectation(const std::vector<int>& A, const std::vector<int>& B,
                               const CumulantSpec& spec) {
	for (int a : A)
		if (std::binary_search(B.begin(), B.end(), a))
			throw std::invalid_argument("wick_pair_expectation: index sets must be disjoint");
	const WickExpansion wa = wick_as_ordinary(A, spec);
	const WickExpansion wb = wick_as_ordinary(B, spec);
	Rational total(0);
	for (const auto& [ta, ca] : wa) {
		for (const auto& [tb, cb] : wb) {
			std::vector<int> joint;
			joint.reserve(ta.size() + tb.size());
			std::merge(ta.begin(), ta.end(), tb.begin(), tb.end(), std::back_inserter(joint));
			total = total + ca * cb * moments_from_cumulants(spec, joint);
		}
	}
	return total;
}

Poly gaussian_wick_polynomial(int n, const Rational& c) {
	if (n < 0 || n > 10) throw BudgetExceeded("gaussian_wick_polynomial: n must lie in [0, 10]");
	std::vector<int> ground(static_cast<std::size_t>(n));
	for (int i = 0; i < n; ++i) ground[static_cast<std::size_t>(i)] = i;
	const CumulantSpec spec = CumulantSpec::gaussian(n, c);
	Poly out(0);
	const Poly x = Poly::var("x");
	for (const auto& [tuple, coeff] : wick_as_ordinary(ground, spec))
		out = out + Poly(coeff) * x.pow(static_cast<int>(tuple.size()));
	return out;
}

bool IsometryCheck::within(double nsigma) const {
	if (mc_stderr == 0.0) return mc_mean == exact;
	return std::abs(mc_mean - exact) <= nsigma * mc_stderr;
}

namespace {

/// Ascending odometer over [0, ncells)^k; returns false once exhausted.
bool advance(std::vector<int>& idx, int ncells) {
	for (int pos = static_cast<int>(idx.size()) - 1; pos >= 0; --pos) {
		if (++idx[static_cast<std::size_t>(pos)] < ncells) return true;
		idx[static_cast<std::size_t>(pos)] = 0;
	}
	return false;
}

std::size_t flat(const std::vector<int>& idx, int ncells) {
	std::size_t out = 0;
	for (int i : idx) out = out * static_cast<std::size_t>(ncells) + static_cast<std::size_t>(i);
	return out;
}

/// Multiple Wick integral of one realisation: repeated cells inside a tuple
/// contribute the Wick power H_mult(xi_cell, var) rather than a plain power.
double chaos_integral(const std::vector<double>& coeffs, int k, int ncells, double dvk,
                      const std::vector<std::vector<double>>& hermite) {
	std::vector<int> idx(static_cast<std::size_t>(k), 0);
	std::vector<int> mult(static_cast<std::size_t>(k), 0);
	double total = 0.0;
	do {
		const double c = coeffs[flat(idx, ncells)];
		if (c == 0.0) continue;
		// multiplicity of each distinct cell in the tuple (k <= 3, so the
		// quadratic scan is cheap)
		double w = 1.0;
		for (int a = 0; a < k; ++a) {
			int m = 0;
			bool first = true;
			for (int b = 0; b < k; ++b) {
				if (idx[static_cast<std::size_t>(b)] != idx[static_cast<std::size_t>(a)]) continue;
				if (b < a) { first = false; break; }
				++m;
			}
			if (first) w *= hermite[static_cast<std::size_t>(idx[static_cast<std::size_t>(a)])][static_cast<std::size_t>(m)];
		}
		total += c * w;
	} while (advance(idx, ncells));
	return total * dvk;
}

} // namespace

IsometryCheck ito_isometry_check(int k, int ncells, double dv,
                                 const std::vector<double>& f,
                                 const std::vector<double>& g,
                                 std::uint64_t seed, std::int64_t samples) {
	if (k < 1 || k > 3) throw std::invalid_argument("ito_isometry_check: k must lie in [1, 3]");
	std::size_t expect = 1;
	for (int i = 0; i < k; ++i) expect *= static_cast<std::size_t>(ncells);
	if (f.size() != expect || g.size() != expect)
		throw std::invalid_argument("ito_isometry_check: kernel arrays must have ncells^k entries");

	double dvk = 1.0;
	for (int i = 0; i < k; ++i) dvk *= dv;

	// exact symmetrised pairing: sum over permutations of the g-arguments
	std::vector<std::vector<int>> perms;
	{
		std::vector<int> p(static_cast<std::size_t>(k));
		for (int i = 0; i < k; ++i) p[static_cast<std::size_t>(i)] = i;
		do perms.push_back(p);
		while (std::next_permutation(p.begin(), p.end()));
	}
	double exact = 0.0;
	{
		std::vector<int> idx(static_cast<std::size_t>(k), 0);
		std::vector<int> jdx(static_cast<std::size_t>(k), 0);
		do {
			const double fi = f[flat(idx, ncells)];
			if (fi == 0.0) continue;
			for (const std::vector<int>& p : perms) {
				for (int a = 0; a < k; ++a)
					jdx[static_cast<std::size_t>(a)] = idx[static_cast<std::size_t>(p[static_cast<std::size_t>(a)])];
				exact += fi * g[flat(jdx, ncells)];
			}
		} while (advance(idx, ncells));
		exact *= dvk;
	}

	const double var = 1.0 / dv;
	const double sd = std::sqrt(var);
	std::mt19937_64 gen = seeded_stream(seed, 0);
	std::normal_distribution<double> normal(0.0, sd);

	RunningStats prod_stats;
	RunningStats f_stats;
	std::vector<std::vector<double>> hermite(static_cast<std::size_t>(ncells),
	                                         std::vector<double>(static_cast<std::size_t>(k) + 1, 0.0));
	const bool same_kernel = (&f == &g) || f == g;
	for (std::int64_t s = 0; s < samples; ++s) {
		for (int c = 0; c < ncells; ++c) {
			auto& h = hermite[static_cast<std::size_t>(c)];
			const double xi = normal(gen);
			h[0] = 1.0;
			if (k >= 1) h[1] = xi;
			for (int m = 1; m < k; ++m)
				h[static_cast<std::size_t>(m) + 1] = xi * h[static_cast<std::size_t>(m)] - static_cast<double>(m) * var * h[static_cast<std::size_t>(m) - 1];
		}
		const double fi = chaos_integral(f, k, ncells, dvk, hermite);
		const double gi = same_kernel ? fi : chaos_integral(g, k, ncells, dvk, hermite);
		prod_stats.push(fi * gi);
		f_stats.push(fi);
	}

	IsometryCheck out;
	out.mc_mean = prod_stats.mean();
	out.mc_stderr = prod_stats.stderr_of_mean();
	out.exact = exact;
	out.zscore = out.mc_stderr > 0.0 ? (out.mc_mean - out.exact) / out.mc_stderr : 0.0;
	const double r2 = f_stats.raw2();
	out.moment_ratio = r2 > 0.0 ? f_stats.raw4() / (r2 * r2) : 0.0;
	out.moment_bound = std::pow(3.0, 2.0 * static_cast<double>(k));
	return out;
}

} // namespace rs
