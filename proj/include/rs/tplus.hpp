#pragma once
#include "rs/symbols.hpp"

namespace rs {

/// Basis element of the structure group's algebra: a commutative monomial
///     X^k * prod_i J_{l_i}(tau_i)^{m_i}
/// where each J is a decorated integration node I_l or E_l with argument in
/// the symbol space. Only strictly positive homogeneity factors exist:
/// I_l(tau) is zero unless |l|_s < |tau| + 2 (E: + 1), and I_l of a
/// polynomial-only argument is zero. Construction goes through the smart
/// constructors which enforce both rules by returning nullopt.
class TPlusSymbol {
public:
	struct Factor {
		Symbol::FactorKind kind; // IntI or IntE
		MultiIndex label;
		std::shared_ptr<const Symbol> arg;
		int mult;
	};

	TPlusSymbol() = default;

	static TPlusSymbol one(int dim);
	static TPlusSymbol poly(const MultiIndex& k);
	static TPlusSymbol X(int dim, int axis) { return poly(MultiIndex::unit(dim, axis)); }
	static std::optional<TPlusSymbol> J(Symbol::FactorKind kind, const MultiIndex& label,
	                                    const Symbol& arg, const Rational& kappa);
	TPlusSymbol operator*(const TPlusSymbol& o) const;

	bool valid() const { return p_ != nullptr; }
	int dim() const { return p_->poly.dim; }
	const MultiIndex& poly_part() const { return p_->poly; }
	const std::vector<Factor>& factors() const { return p_->factors; }
	bool is_one() const { return p_->poly.is_zero() && p_->factors.empty(); }
	bool is_poly_only() const { return p_->factors.empty(); }
	int integration_count() const { return p_->int_count; }

	const Homogeneity& homogeneity() const { return p_->hom; }
	const std::string& render() const { return p_->render; }

	bool operator==(const TPlusSymbol& o) const;
	bool operator<(const TPlusSymbol& o) const;

private:
	struct Node {
		MultiIndex poly;
		std::vector<Factor> factors;
		Homogeneity hom;
		std::string render;
		int int_count = 0;
	};
	std::shared_ptr<const Node> p_;
	static TPlusSymbol intern(Node n);
};

std::string tplus_factor_render(const TPlusSymbol::Factor& f);
Homogeneity tplus_factor_homogeneity(const TPlusSymbol::Factor& f);

/// Whether J_label(arg) is a nonzero element of the positive algebra.
bool jnode_admissible(Symbol::FactorKind kind, const MultiIndex& label, const Symbol& arg,
                      const Rational& kappa);

} // namespace rs
