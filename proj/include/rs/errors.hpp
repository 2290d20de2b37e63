#pragma once
#include <stdexcept>
#include <string>

namespace rs {

/// Symbol-space saturation exceeded its budget; only reachable with a
/// misconfigured rule set or cutoff, never for the shipped rules.
struct NonTermination : std::runtime_error {
	explicit NonTermination(const std::string& m) : std::runtime_error(m) {}
};

/// A derivation needed terms that the requested truncation order cut away.
struct TruncationInsufficient : std::runtime_error {
	explicit TruncationInsufficient(const std::string& m) : std::runtime_error(m) {}
};

/// Pointwise product of modelled distributions left the symbol basis.
struct ProductOutsideBasis : std::runtime_error {
	explicit ProductOutsideBasis(const std::string& m) : std::runtime_error(m) {}
};

/// Grid spacing too coarse for the requested mollification scale.
struct ResolutionTooCoarse : std::runtime_error {
	explicit ResolutionTooCoarse(const std::string& m) : std::runtime_error(m) {}
};

struct NonPositiveGamma : std::runtime_error {
	explicit NonPositiveGamma(const std::string& m) : std::runtime_error(m) {}
};

/// The exponential of a renormalisation generator set failed to terminate
/// within its budget on some symbol.
struct NonNilpotent : std::runtime_error {
	explicit NonNilpotent(const std::string& m) : std::runtime_error(m) {}
};

/// A combinatorial enumeration would exceed its hard size budget.
struct BudgetExceeded : std::runtime_error {
	explicit BudgetExceeded(const std::string& m) : std::runtime_error(m) {}
};

/// A cumulant table was queried on a subset it does not cover.
struct MissingCumulant : std::runtime_error {
	explicit MissingCumulant(const std::string& m) : std::runtime_error(m) {}
};

/// A moment table was queried on a subset it does not cover.
struct MissingMoment : std::runtime_error {
	explicit MissingMoment(const std::string& m) : std::runtime_error(m) {}
};

/// Adaptive quadrature failed to converge to the requested tolerance.
struct QuadratureFailure : std::runtime_error {
	explicit QuadratureFailure(const std::string& m) : std::runtime_error(m) {}
};

/// A Monte-Carlo graph integral shows heavy-tail divergence across batches.
struct NonIntegrable : std::runtime_error {
	explicit NonIntegrable(const std::string& m) : std::runtime_error(m) {}
};

/// A model build needed a symbol whose subtree is missing from the set.
struct ClosureError : std::runtime_error {
	explicit ClosureError(const std::string& m) : std::runtime_error(m) {}
};

/// Trajectory crossed the sup-norm blow-up threshold at `time`.
struct BlowUp : std::runtime_error {
	BlowUp(const std::string& m, double t) : std::runtime_error(m), time(t) {}
	double time;
};

/// Time step violates the scheme's stability bound.
struct StabilityViolation : std::runtime_error {
	explicit StabilityViolation(const std::string& m) : std::runtime_error(m) {}
};

} // namespace rs
