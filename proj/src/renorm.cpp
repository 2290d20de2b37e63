#include "rs/renorm.hpp"
#include "rs/model_space.hpp"

namespace rs {

namespace {

bool is_xi_leg(const Symbol::Factor& f, const Symbol& xi) {
	return f.kind == Symbol::FactorKind::IntI && *f.arg == xi;
}

/// Copy of `tau` with factor multiplicities reduced by `take[i]`.
Symbol strip(const Symbol& tau, const std::vector<int>& take) {
	std::vector<Symbol::Factor> fv;
	const auto& fs = tau.factors();
	for (std::size_t i = 0; i < fs.size(); ++i) {
		int m = fs[i].mult - take[i];
		if (m > 0) fv.push_back({fs[i].kind, fs[i].arg, m});
	}
	return Symbol::make(tau.poly_part(), std::move(fv));
}

} // namespace

FormalSum<Rational> apply_generator(const SubstitutionGenerator& g, const Symbol& tau) {
	FormalSum<Rational> out;
	if (g.listed_only) {
		for (const auto& [s, v] : g.table)
			if (s == tau) return v;
		return out;
	}
	const auto& fs = tau.factors();
	if (fs.empty()) return out;
	const Symbol xi = Symbol::xi(tau.dim());

	int nxi = 0;
	std::size_t xi_pos = fs.size();
	for (std::size_t i = 0; i < fs.size(); ++i)
		if (is_xi_leg(fs[i], xi)) { nxi = fs[i].mult; xi_pos = i; }

	// occurrences rooted at the top node
	if (nxi >= g.bottom) {
		if (g.inner == 0) {
			std::vector<int> take(fs.size(), 0);
			take[xi_pos] = g.bottom;
			out.add(strip(tau, take), binomial(nxi, g.bottom));
		} else {
			for (std::size_t i = 0; i < fs.size(); ++i) {
				if (fs[i].kind != Symbol::FactorKind::IntI) continue;
				const Symbol& sig = *fs[i].arg;
				int mxi = 0;
				std::vector<int> inner_take(sig.factors().size(), 0);
				for (std::size_t j = 0; j < sig.factors().size(); ++j)
					if (is_xi_leg(sig.factors()[j], xi)) {
						mxi = sig.factors()[j].mult;
						inner_take[j] = g.inner;
					}
				if (mxi < g.inner) continue;
				std::vector<int> take(fs.size(), 0);
				take[xi_pos] = g.bottom;
				take[i] += 1;
				Rational ways = binomial(nxi, g.bottom) * Rational(fs[i].mult) *
				                binomial(mxi, g.inner);
				out.add(strip(tau, take) * strip(sig, inner_take), ways);
			}
		}
	}

	// descend into integration arguments (product rule)
	for (std::size_t i = 0; i < fs.size(); ++i) {
		if (!fs[i].arg) continue;
		FormalSum<Rational> child = apply_generator(g, *fs[i].arg);
		if (child.is_zero()) continue;
		std::vector<int> take(fs.size(), 0);
		take[i] = 1;
		Symbol parent = strip(tau, take);
		for (const auto& [s2, c2] : child.terms()) {
			std::optional<Symbol> w = fs[i].kind == Symbol::FactorKind::IntI
			                              ? Symbol::I(s2)
			                              : std::optional<Symbol>(Symbol::E(s2));
			if (!w) continue; // I of a bare monomial vanishes
			out.add(parent * *w, c2 * Rational(fs[i].mult));
		}
	}
	return out;
}

std::vector<SubstitutionGenerator> cubic_generators() {
	return {
	    {"L1", 2, 0, false, {}}, {"L2", 3, 0, false, {}}, {"L3", 2, 2, false, {}},
	    {"L4", 2, 3, false, {}}, {"L5", 1, 3, false, {}},
	};
}

std::vector<SubstitutionGenerator> extended_generators(int dim) {
	const Symbol i1 = *Symbol::I(Symbol::xi(dim));
	const Symbol one = Symbol::one(dim);
	const Symbol t30 = *Symbol::I(i1.pow(3));
	const Symbol t32 = i1.pow(2) * t30;
	const Symbol t22 = i1.pow(2) * *Symbol::I(i1.pow(2));
	const Symbol e50 = *Symbol::I(Symbol::E(i1.pow(5)));
	const Symbol e40 = *Symbol::I(Symbol::E(i1.pow(4)));
	auto unit = [&](const Symbol& s, Rational c) { return FormalSum<Rational>(s, c); };

	std::vector<SubstitutionGenerator> gens;
	gens.push_back({"Lt1", 2, 0, false, {}});
	gens.push_back({"Lt2", 0, 0, true,
	                {{t22, unit(one, Rational(1))}, {t32, unit(i1, Rational(3))}}});
	gens.push_back({"Lt3", 0, 0, true,
	                {{Symbol::E(i1.pow(3) * t30), unit(one, Rational(1))},
	                 {Symbol::E(i1.pow(4) * t30), unit(i1, Rational(4))}}});
	gens.push_back({"Lt4", 0, 0, true,
	                {{Symbol::E(i1.pow(4) * e40), unit(one, Rational(1))},
	                 {Symbol::E(i1.pow(4) * e50), unit(i1, Rational(5))}}});
	return gens;
}

RenormMap::RenormMap(std::vector<SubstitutionGenerator> gens, std::vector<Poly> coeffs,
                     int budget)
    : gens_(std::move(gens)), coeffs_(std::move(coeffs)), budget_(budget) {
	if (gens_.size() != coeffs_.size())
		throw std::invalid_argument("renorm map needs one coefficient per generator");
}

FormalSum<Poly> RenormMap::derivation(const FormalSum<Poly>& v) const {
	FormalSum<Poly> out;
	for (std::size_t i = 0; i < gens_.size(); ++i) {
		if (coeffs_[i].is_zero()) continue;
		for (const auto& [s, c] : v.terms()) {
			FormalSum<Rational> img = apply_generator(gens_[i], s);
			for (const auto& [s2, r] : img.terms())
				out.add(s2, Poly(0) - coeffs_[i] * c * Poly(r));
		}
	}
	return out;
}

const FormalSum<Poly>& RenormMap::image(const Symbol& tau) const {
	auto it = memo_.find(tau);
	if (it != memo_.end()) return it->second;
	FormalSum<Poly> acc(tau, Poly(1));
	FormalSum<Poly> cur = acc;
	int n = 0;
	while (!cur.is_zero()) {
		if (++n > budget_)
			throw NonNilpotent("exponential series did not terminate on " + tau.render());
		cur = derivation(cur) * Poly(Rational(1, n));
		acc.add(cur);
	}
	return memo_.emplace(tau, std::move(acc)).first->second;
}

FormalSum<Poly> RenormMap::apply(const FormalSum<Poly>& v) const {
	FormalSum<Poly> out;
	for (const auto& [s, c] : v.terms()) out.add(image(s), c);
	return out;
}

FormalSum<Rational> RenormMap::apply_rational(const FormalSum<Rational>& v) const {
	FormalSum<Rational> out;
	for (const auto& [s, c] : v.terms())
		for (const auto& [s2, p] : image(s).terms()) {
			if (!p.is_constant())
				throw std::logic_error("rational application of a symbolic renorm map");
			out.add(s2, c * p.constant_part());
		}
	return out;
}

FormalSum<double> RenormMap::image_numeric(const Symbol& tau,
                                           const std::map<std::string, double>& values) const {
	FormalSum<double> out;
	for (const auto& [s, p] : image(tau).terms()) out.add(s, p.eval(values));
	return out;
}

RenormMap exp_map(std::vector<SubstitutionGenerator> gens, std::vector<Poly> coeffs,
                  int budget) {
	return RenormMap(std::move(gens), std::move(coeffs), budget);
}

AdmissibilityReport check_renorm_admissible(const RenormMap& M,
                                            const std::vector<Symbol>& probes,
                                            bool extended) {
	AdmissibilityReport rep;
	for (const auto& tau : probes) {
		std::optional<Symbol> itau = Symbol::I(tau);
		if (itau) {
			FormalSum<Poly> lhs = M.image(*itau);
			FormalSum<Poly> rhs = apply_I(M.image(tau));
			if (!(lhs == rhs)) {
				rep.commutes_with_integration = false;
				rep.detail += "I-commutation fails at " + tau.render() + "\n";
			}
		}
		for (int ax = 0; ax <= tau.dim(); ++ax) {
			Symbol xs = Symbol::poly(MultiIndex::unit(tau.dim(), ax));
			FormalSum<Poly> lhs = M.image(xs * tau);
			FormalSum<Poly> rhs;
			for (const auto& [s, c] : M.image(tau).terms()) rhs.add(xs * s, c);
			if (!(lhs == rhs)) {
				rep.commutes_with_poly_mult = false;
				rep.detail += "monomial commutation fails at " + tau.render() + "\n";
				break;
			}
		}
	}
	for (const auto& tau : probes) {
		if (!in_w_sector(tau, extended)) continue;
		for (const auto& [s, c] : M.image(tau).terms())
			if (!in_w_sector(s, extended)) {
				rep.preserves_sector = false;
				rep.detail += "sector escape " + tau.render() + " -> " + s.render() + "\n";
			}
	}
	return rep;
}

} // namespace rs
