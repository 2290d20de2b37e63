#pragma once
#include "rs/symbols.hpp"
#include "rs/poly.hpp"
#include "rs/errors.hpp"
#include <map>
#include <string>
#include <vector>

namespace rs {

/// One renormalisation generator L. In pattern mode it contracts every
/// occurrence of a fixed divergent configuration and sums the results:
/// an occurrence consists of `bottom` I(Xi) legs at a product node plus,
/// when inner > 0, one I(sigma) factor at the same node whose argument
/// carries `inner` I(Xi) legs at its top node. Contraction deletes the
/// matched legs and the I wrap; the rest of sigma merges into the node.
/// The recursion descends into integration arguments by the product rule,
/// and I(poly) = 0 kills terms whose argument loses all its factors.
/// In listed mode the generator acts by exact-symbol lookup instead and
/// vanishes elsewhere.
struct SubstitutionGenerator {
	std::string name;
	int bottom = 0;
	int inner = 0;
	bool listed_only = false;
	std::vector<std::pair<Symbol, FormalSum<Rational>>> table;
};

FormalSum<Rational> apply_generator(const SubstitutionGenerator& g, const Symbol& tau);

/// L1..L5: pair, triple, pair-over-pair, pair-over-triple, leg-over-triple.
std::vector<SubstitutionGenerator> cubic_generators();
/// Lt1 (pair contraction commuting through E) and the listed generators
/// Lt2..Lt4 acting on the divergent quintic symbols.
std::vector<SubstitutionGenerator> extended_generators(int dim = 3);

/// exp(-sum_i c_i L_i), compiled lazily per symbol. Each generator strictly
/// reduces the noise count, so the exponential series terminates on every
/// symbol; the budget guards against a non-nilpotent generator set.
class RenormMap {
public:
	RenormMap() = default;
	RenormMap(std::vector<SubstitutionGenerator> gens, std::vector<Poly> coeffs,
	          int budget = 64);

	const FormalSum<Poly>& image(const Symbol& tau) const;
	FormalSum<Poly> apply(const FormalSum<Poly>& v) const;
	FormalSum<Rational> apply_rational(const FormalSum<Rational>& v) const;

	/// Image with the coefficient variables bound to numbers.
	FormalSum<double> image_numeric(const Symbol& tau,
	                                const std::map<std::string, double>& values) const;

	const std::vector<SubstitutionGenerator>& generators() const { return gens_; }
	const std::vector<Poly>& coefficients() const { return coeffs_; }

private:
	std::vector<SubstitutionGenerator> gens_;
	std::vector<Poly> coeffs_;
	int budget_ = 64;
	mutable std::map<Symbol, FormalSum<Poly>> memo_;

	FormalSum<Poly> derivation(const FormalSum<Poly>& v) const;
};

RenormMap exp_map(std::vector<SubstitutionGenerator> gens, std::vector<Poly> coeffs,
                  int budget = 64);

/// Structural checks for a renormalisation map on a probe set: commutation
/// with I (with I(poly) = 0 on both sides), commutation with monomial
/// multiplication, and stability of the forcing-sector grammar (images of
/// w-sector probes stay w-sector; the grammar check is cutoff free since
/// contraction raises homogeneity).
struct AdmissibilityReport {
	bool commutes_with_integration = true;
	bool commutes_with_poly_mult = true;
	bool preserves_sector = true;
	std::string detail;
	bool ok() const {
		return commutes_with_integration && commutes_with_poly_mult && preserves_sector;
	}
};

AdmissibilityReport check_renorm_admissible(const RenormMap& M,
                                            const std::vector<Symbol>& probes,
                                            bool extended = false);

} // namespace rs
