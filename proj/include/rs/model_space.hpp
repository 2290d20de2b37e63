#pragma once
#include "rs/symbols.hpp"
#include <vector>

namespace rs {

/// The symbol sets of the cubic (and optionally quintic-extended) structure.
/// U is the ansatz side (polynomials, I(Xi), closed under I of triple
/// products, plus I(E(quintuple)) in extended mode). W hosts the right-hand
/// side: the noise, triple products of U, and E(quintuple) in extended mode.
/// W_ex additionally holds plain quintuple products (extended mode only,
/// otherwise W_ex == W). All three lists are filtered to homogeneity <= gamma
/// at the working kappa and sorted.
struct ModelSpace {
	HomogeneityParams params;
	Rational gamma;
	std::vector<Symbol> U, W, W_ex;

	/// Strictly negative-homogeneity symbols of U ∪ W, sorted.
	std::vector<Symbol> negative() const;
};

ModelSpace generate_model_space(const HomogeneityParams& params, const Rational& gamma,
                                std::size_t budget = 20000);

/// Structural (cutoff-free) membership in the two sectors. A u-sector symbol
/// is a monomial, I(Xi), I of a w-sector product, or (extended) I(E(q)) with
/// q a product of at most five u-sector symbols. A w-sector symbol is Xi, a
/// product of at most three u-sector symbols, or (extended) E(q) as above.
bool in_u_sector(const Symbol& tau, bool extended = false);
bool in_w_sector(const Symbol& tau, bool extended = false);

/// Relabel spatial axes by perm (perm[i-1] is the image of axis i), applied
/// through the whole tree. Time axis fixed.
Symbol permute_axes(const Symbol& s, const std::vector<int>& perm);

/// Group symbols into orbits under spatial axis permutation; representative
/// is the orbit member with the smallest render.
struct CensusEntry {
	Symbol representative;
	int multiplicity;
};
std::vector<CensusEntry> group_by_axis_symmetry(const std::vector<Symbol>& syms);

} // namespace rs
