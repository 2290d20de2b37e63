#pragma once
#include "rs/tplus.hpp"
#include "rs/tensor.hpp"

namespace rs {

/// Memoising evaluator for the two coproducts
///   Delta  : T  -> T ⊗ T+
///   Delta+ : T+ -> T+ ⊗ T+
/// with the conventions
///   Delta Xi      = Xi ⊗ 1
///   Delta X_i     = X_i ⊗ 1 + 1 ⊗ X_i            (primitive, extended
///                   multiplicatively to powers via binomials)
///   Delta (s t)   = Delta s * Delta t
///   Delta I(tau)  = (I ⊗ id) Delta tau + sum_l X^l/l! ⊗ I_l(tau)
/// (E analogous with order 1), the l-sum running over every label that keeps
/// the right factor nonzero; and on the positive side
///   Delta+ J_l(tau) = (J_l ⊗ id) Delta tau + sum_k X^k/k! ⊗ J_{l+k}(tau)
/// where the left embedding maps symbols sigma ⊦ J_l(sigma), dropping
/// inadmissible nodes.
class CoproductContext {
public:
	explicit CoproductContext(HomogeneityParams params) : params_(params) {}

	const HomogeneityParams& params() const { return params_; }

	const Tensor<Symbol, TPlusSymbol>& delta(const Symbol& tau);
	const Tensor<TPlusSymbol, TPlusSymbol>& delta_plus(const TPlusSymbol& sigma);

	/// Counit: 1 on the unit, 0 on everything else.
	static Rational counit(const TPlusSymbol& s) { return s.is_one() ? Rational(1) : Rational(0); }

	bool check_coassoc_mixed(const Symbol& tau);   // (Delta ⊗ id)Delta = (id ⊗ Delta+)Delta
	bool check_coassoc_plus(const TPlusSymbol& s); // (Delta+ ⊗ id)Delta+ = (id ⊗ Delta+)Delta+
	bool check_counit(const Symbol& tau);          // (id ⊗ counit)Delta = id

private:
	HomogeneityParams params_;
	std::map<Symbol, Tensor<Symbol, TPlusSymbol>> delta_memo_;
	std::map<TPlusSymbol, Tensor<TPlusSymbol, TPlusSymbol>> dplus_memo_;

	Tensor<Symbol, TPlusSymbol> delta_factor(const Symbol::Factor& f);
	Tensor<TPlusSymbol, TPlusSymbol> dplus_factor(const TPlusSymbol::Factor& f);
};

/// Labels l with J_{base+l}(arg) nonzero, including l = 0.
std::vector<MultiIndex> admissible_label_shifts(Symbol::FactorKind kind, const MultiIndex& base,
                                                const Symbol& arg, const Rational& kappa);

} // namespace rs
