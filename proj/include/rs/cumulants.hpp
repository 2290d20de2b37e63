#pragma once
#include <cstdint>
#include <functional>
#include <map>
#include <vector>

#include "rs/poly.hpp"
#include "rs/rational.hpp"

namespace rs {

/// Set partition of {0,..,n-1}, canonical form: blocks ordered by their
/// smallest element, indices ascending inside each block.
using Partition = std::vector<std::vector<int>>;

/// All set partitions of an n-element ground set, generated from restricted
/// growth strings so each partition appears exactly once in canonical form.
/// Throws BudgetExceeded beyond n = 12 (Bell(12) is already ~4.2e6).
std::vector<Partition> enumerate_partitions(int n);

/// Joint cumulants of a finite family of random variables, indexed by sorted
/// subsets of {0,..,n-1}. Repeated variables are modelled by distinct indices
/// that carry identical correlations, so ground sets stay genuine sets while
/// powers remain expressible.
///
/// The table must be total on every subset it is queried with; a miss throws
/// MissingCumulant rather than defaulting to zero, so an under-specified
/// model fails loudly.
class CumulantSpec {
public:
	explicit CumulantSpec(std::map<std::vector<int>, Rational> kappa);

	/// One centered Gaussian seen through n interchangeable indices:
	/// kappa_2 = variance on every pair, all other orders zero.
	static CumulantSpec gaussian(int n, const Rational& variance);

	/// n indices of one Poisson(lambda) variable: every joint cumulant
	/// equals lambda.
	static CumulantSpec poisson(int n, const Rational& lambda);

	/// `subset` must be sorted and duplicate-free.
	const Rational& cumulant(const std::vector<int>& subset) const;

	const std::map<std::vector<int>, Rational>& table() const { return kappa_; }

private:
	std::map<std::vector<int>, Rational> kappa_;
};

/// Field-valued cumulant kernel kappa_p: evaluated on p spacetime points,
/// each point a coordinate vector (t, x_1, ..). Consumed by the graph
/// integrators, where one hyperedge of arity p carries one such kernel.
using CumulantKernel = std::function<double(const std::vector<std::vector<double>>&)>;

/// Moment E[X_B] as the sum over all partitions of B of products of joint
/// cumulants of the blocks.
Rational moments_from_cumulants(const CumulantSpec& spec, const std::vector<int>& B);

/// Joint cumulant of B recovered from a total moment table by Moebius
/// inversion on the partition lattice:
///   kappa(B) = sum_pi (-1)^{|pi|-1} (|pi|-1)! prod_blocks E[X_block].
/// Inverse of moments_from_cumulants; throws MissingMoment on a table gap.
Rational cumulants_from_moments(const std::map<std::vector<int>, Rational>& moments,
                                const std::vector<int>& B);

/// Linear combination of monomials indexed by sub-tuples of the ground set.
/// Which kind of monomial (ordinary product or Wick product) is contextual.
using WickExpansion = std::map<std::vector<int>, Rational>;

/// Ordinary product X^A expanded over Wick monomials: the coefficient of
/// :X_B: is the full partition sum over A\B, i.e. the moment E[X_{A\B}].
WickExpansion wick_decompose(const std::vector<int>& A, const CumulantSpec& spec);

/// Wick monomial :X_A: written in ordinary products, by triangular inversion
/// of wick_decompose over the subset lattice.
WickExpansion wick_as_ordinary(const std::vector<int>& A, const CumulantSpec& spec);

/// E[:X_A:], evaluated by expanding into ordinary products and taking
/// moments. Exactly zero for nonempty A, and computed without using that
/// fact, so it doubles as a consistency probe.
Rational wick_expectation(const std::vector<int>& A, const CumulantSpec& spec);

/// E[:X_A: :X_B:] for disjoint sorted tuples A, B over a common spec.
Rational wick_pair_expectation(const std::vector<int>& A, const std::vector<int>& B,
                               const CumulantSpec& spec);

/// Wick power of a single variance-c Gaussian: :X^n: as a polynomial in the
/// variable "x". Computed through wick_as_ordinary on n identified indices;
/// equals the variance-c Hermite polynomial H_n(x, c).
Poly gaussian_wick_polynomial(int n, const Rational& c);

/// Monte-Carlo check of the isometry E I_k(f) I_k(g) = <f, g>_sym for
/// discrete multiple Wick integrals against white noise on `ncells` cells of
/// volume dv. The exact side is the symmetrised pairing
///   sum_{sigma in S_k} sum_i f(i) g(sigma i) dv^k,
/// which is k! <f_sym, g_sym> in terms of the plain L2 product.
struct IsometryCheck {
	double mc_mean = 0.0;      ///< Monte-Carlo estimate of E I_k(f) I_k(g)
	double mc_stderr = 0.0;    ///< standard error of mc_mean
	double exact = 0.0;        ///< symmetrised pairing, computed exactly
	double zscore = 0.0;       ///< (mc_mean - exact) / mc_stderr
	double moment_ratio = 0.0; ///< sample E[I_k(f)^4] / E[I_k(f)^2]^2
	double moment_bound = 0.0; ///< classical chaos bound (p-1)^{kp/2} at p=4
	bool within(double nsigma = 3.0) const;
};

/// f and g are dense row-major arrays over k-tuples of cells, length
/// ncells^k. Noise per cell is N(0, 1/dv); repeated cells inside a tuple are
/// Wick powers (variance-1/dv Hermite polynomials), so the integral lives in
/// the k-th chaos.
IsometryCheck ito_isometry_check(int k, int ncells, double dv,
                                 const std::vector<double>& f,
                                 const std::vector<double>& g,
                                 std::uint64_t seed, std::int64_t samples);

} // namespace rs
