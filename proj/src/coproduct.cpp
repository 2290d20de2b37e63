#include "rs/coproduct.hpp"
#include <algorithm>

namespace rs {

// --- TPlusSymbol -----------------------------------------------------------

std::string tplus_factor_render(const TPlusSymbol::Factor& f) {
	std::string head = (f.kind == Symbol::FactorKind::IntI) ? "I" : "E";
	if (!f.label.is_zero()) head += "_" + f.label.str();
	return head + "(" + f.arg->render() + ")";
}

Homogeneity tplus_factor_homogeneity(const TPlusSymbol::Factor& f) {
	int order = (f.kind == Symbol::FactorKind::IntI) ? 2 : 1;
	Homogeneity h = f.arg->homogeneity();
	h.a += Rational(order - f.label.scaled_degree());
	return h;
}

bool jnode_admissible(Symbol::FactorKind kind, const MultiIndex& label, const Symbol& arg,
                      const Rational& kappa) {
	if (kind == Symbol::FactorKind::IntI && arg.is_poly_only()) return false;
	int order = (kind == Symbol::FactorKind::IntI) ? 2 : 1;
	return arg.homogeneity().at(kappa) + Rational(order - label.scaled_degree()) > Rational(0);
}

TPlusSymbol TPlusSymbol::intern(Node n) {
	struct Piece {
		Homogeneity hom;
		std::string text;
	};
	auto less = [](const Piece& x, const Piece& y) {
		if (!(x.hom.a == y.hom.a)) return x.hom.a < y.hom.a;
		if (!(x.hom.b == y.hom.b)) return x.hom.b < y.hom.b;
		return x.text < y.text;
	};
	std::stable_sort(n.factors.begin(), n.factors.end(), [&](const Factor& a, const Factor& b) {
		return less(Piece{tplus_factor_homogeneity(a), tplus_factor_render(a)},
		            Piece{tplus_factor_homogeneity(b), tplus_factor_render(b)});
	});
	std::vector<Factor> merged;
	for (auto& f : n.factors) {
		if (f.mult <= 0) continue;
		if (!merged.empty() && merged.back().kind == f.kind &&
			tplus_factor_render(merged.back()) == tplus_factor_render(f))
			merged.back().mult += f.mult;
		else
			merged.push_back(f);
	}
	n.factors = std::move(merged);

	n.hom = Homogeneity{Rational(n.poly.scaled_degree()), Rational(0)};
	n.int_count = 0;
	for (auto& f : n.factors) {
		Homogeneity fh = tplus_factor_homogeneity(f);
		n.hom = n.hom + Homogeneity{fh.a * Rational(f.mult), fh.b * Rational(f.mult)};
		n.int_count += f.mult * (1 + f.arg->integration_count());
	}

	std::vector<Piece> pieces;
	for (int i = 0; i <= n.poly.dim; ++i) {
		if (n.poly.k[i] == 0) continue;
		std::string t = "X_" + std::to_string(i);
		if (n.poly.k[i] > 1) t += "^" + std::to_string(n.poly.k[i]);
		pieces.push_back({Homogeneity{Rational(i == 0 ? 2 : 1), Rational(0)}, t});
	}
	for (auto& f : n.factors) {
		std::string t = tplus_factor_render(f);
		if (f.mult > 1) t += "^" + std::to_string(f.mult);
		pieces.push_back({tplus_factor_homogeneity(f), t});
	}
	std::sort(pieces.begin(), pieces.end(), less);
	if (pieces.empty())
		n.render = "1";
	else {
		std::string r;
		for (std::size_t i = 0; i < pieces.size(); ++i) {
			if (i) r += "*";
			r += pieces[i].text;
		}
		n.render = std::move(r);
	}

	TPlusSymbol s;
	s.p_ = std::make_shared<const Node>(std::move(n));
	return s;
}

TPlusSymbol TPlusSymbol::one(int dim) {
	Node n;
	n.poly = MultiIndex::zero(dim);
	return intern(std::move(n));
}

TPlusSymbol TPlusSymbol::poly(const MultiIndex& k) {
	Node n;
	n.poly = k;
	return intern(std::move(n));
}

std::optional<TPlusSymbol> TPlusSymbol::J(Symbol::FactorKind kind, const MultiIndex& label,
                                          const Symbol& arg, const Rational& kappa) {
	if (!jnode_admissible(kind, label, arg, kappa)) return std::nullopt;
	Node n;
	n.poly = MultiIndex::zero(arg.dim());
	n.factors.push_back({kind, label, std::make_shared<const Symbol>(arg), 1});
	return intern(std::move(n));
}

TPlusSymbol TPlusSymbol::operator*(const TPlusSymbol& o) const {
	Node n;
	n.poly = p_->poly + o.p_->poly;
	n.factors = p_->factors;
	n.factors.insert(n.factors.end(), o.p_->factors.begin(), o.p_->factors.end());
	return intern(std::move(n));
}

bool TPlusSymbol::operator==(const TPlusSymbol& o) const {
	if (p_ == o.p_) return true;
	return dim() == o.dim() && p_->render == o.p_->render;
}

bool TPlusSymbol::operator<(const TPlusSymbol& o) const {
	if (p_ == o.p_) return false;
	if (!(p_->hom.a == o.p_->hom.a)) return p_->hom.a < o.p_->hom.a;
	if (!(p_->hom.b == o.p_->hom.b)) return p_->hom.b < o.p_->hom.b;
	if (p_->render != o.p_->render) return p_->render < o.p_->render;
	return dim() < o.dim();
}

// --- coproducts ------------------------------------------------------------

std::vector<MultiIndex> admissible_label_shifts(Symbol::FactorKind kind, const MultiIndex& base,
                                                const Symbol& arg, const Rational& kappa) {
	int order = (kind == Symbol::FactorKind::IntI) ? 2 : 1;
	// |base + l|_s < |arg| + order; |arg| bounded, so |l|_s stays below an
	// integer cap derived from the kappa-evaluated homogeneity.
	Rational room = arg.homogeneity().at(kappa) + Rational(order - base.scaled_degree());
	int cap = 0;
	while (Rational(cap) < room) ++cap; // smallest integer >= room
	std::vector<MultiIndex> out;
	for (const MultiIndex& l : MultiIndex::below(arg.dim(), cap)) {
		MultiIndex tot = base + l;
		if (jnode_admissible(kind, tot, arg, kappa)) out.push_back(l);
	}
	return out;
}

const Tensor<Symbol, TPlusSymbol>& CoproductContext::delta(const Symbol& tau) {
	auto it = delta_memo_.find(tau);
	if (it != delta_memo_.end()) return it->second;

	const int d = tau.dim();
	// Polynomial part: per-axis primitives, assembled with binomials.
	Tensor<Symbol, TPlusSymbol> acc;
	{
		const MultiIndex& k = tau.poly_part();
		std::vector<MultiIndex> splits;
		MultiIndex j = MultiIndex::zero(d);
		std::function<void(int)> rec = [&](int axis) {
			if (axis > d) {
				splits.push_back(j);
				return;
			}
			for (int v = 0; v <= k.k[axis]; ++v) {
				j.k[axis] = v;
				rec(axis + 1);
			}
			j.k[axis] = 0;
		};
		rec(0);
		for (const MultiIndex& a : splits) {
			Rational coeff(1);
			MultiIndex b = MultiIndex::zero(d);
			for (int i = 0; i <= d; ++i) {
				coeff *= binomial(k.k[i], a.k[i]);
				b.k[i] = k.k[i] - a.k[i];
			}
			acc.add(Symbol::poly(a), TPlusSymbol::poly(b), coeff);
		}
	}
	for (const auto& f : tau.factors()) {
		Tensor<Symbol, TPlusSymbol> df = delta_factor(f);
		for (int m = 0; m < f.mult; ++m) acc = acc * df;
	}
	return delta_memo_.emplace(tau, std::move(acc)).first->second;
}

Tensor<Symbol, TPlusSymbol> CoproductContext::delta_factor(const Symbol::Factor& f) {
	const Rational kappa = params_.kappa;
	if (f.kind == Symbol::FactorKind::Noise) {
		int d = params_.dim;
		return {Symbol::xi(d), TPlusSymbol::one(d)};
	}
	const Symbol& arg = *f.arg;
	const int d = arg.dim();
	Tensor<Symbol, TPlusSymbol> out;
	// (J ⊗ id) Delta arg: apply the undecorated node to the left legs.
	for (auto& [key, c] : delta(arg).terms()) {
		const Symbol& left = key.first;
		std::optional<Symbol> jl;
		if (f.kind == Symbol::FactorKind::IntI)
			jl = Symbol::I(left);
		else
			jl = Symbol::E(left);
		if (jl) out.add(*jl, key.second, c);
	}
	// sum_l X^l / l! ⊗ J_l(arg)
	for (const MultiIndex& l : admissible_label_shifts(f.kind, MultiIndex::zero(d), arg, kappa)) {
		auto jr = TPlusSymbol::J(f.kind, l, arg, kappa);
		out.add(Symbol::poly(l), *jr, Rational(1) / l.fact());
	}
	return out;
}

const Tensor<TPlusSymbol, TPlusSymbol>& CoproductContext::delta_plus(const TPlusSymbol& sigma) {
	auto it = dplus_memo_.find(sigma);
	if (it != dplus_memo_.end()) return it->second;

	const int d = sigma.dim();
	Tensor<TPlusSymbol, TPlusSymbol> acc;
	{
		const MultiIndex& k = sigma.poly_part();
		std::vector<MultiIndex> splits;
		MultiIndex j = MultiIndex::zero(d);
		std::function<void(int)> rec = [&](int axis) {
			if (axis > d) {
				splits.push_back(j);
				return;
			}
			for (int v = 0; v <= k.k[axis]; ++v) {
				j.k[axis] = v;
				rec(axis + 1);
			}
			j.k[axis] = 0;
		};
		rec(0);
		for (const MultiIndex& a : splits) {
			Rational coeff(1);
			MultiIndex b = MultiIndex::zero(d);
			for (int i = 0; i <= d; ++i) {
				coeff *= binomial(k.k[i], a.k[i]);
				b.k[i] = k.k[i] - a.k[i];
			}
			acc.add(TPlusSymbol::poly(a), TPlusSymbol::poly(b), coeff);
		}
	}
	for (const auto& f : sigma.factors()) {
		Tensor<TPlusSymbol, TPlusSymbol> df = dplus_factor(f);
		for (int m = 0; m < f.mult; ++m) acc = acc * df;
	}
	return dplus_memo_.emplace(sigma, std::move(acc)).first->second;
}

Tensor<TPlusSymbol, TPlusSymbol> CoproductContext::dplus_factor(const TPlusSymbol::Factor& f) {
	const Rational kappa = params_.kappa;
	const Symbol& arg = *f.arg;
	Tensor<TPlusSymbol, TPlusSymbol> out;
	// (J_l ⊗ id) Delta arg, embedding left symbol legs as J_l(sigma).
	for (auto& [key, c] : delta(arg).terms()) {
		const Symbol& left = key.first;
		if (auto jl = TPlusSymbol::J(f.kind, f.label, left, kappa)) {
			// Right leg of Delta lives in T+ already.
			out.add(*jl, key.second, c);
		}
	}
	// sum_k X^k / k! ⊗ J_{l+k}(arg)
	for (const MultiIndex& k : admissible_label_shifts(f.kind, f.label, arg, kappa)) {
		auto jr = TPlusSymbol::J(f.kind, f.label + k, arg, kappa);
		out.add(TPlusSymbol::poly(k), *jr, Rational(1) / k.fact());
	}
	return out;
}

// --- identities ------------------------------------------------------------

bool CoproductContext::check_coassoc_mixed(const Symbol& tau) {
	TripleTensor<Symbol, TPlusSymbol, TPlusSymbol> lhs, rhs;
	for (auto& [key, c] : delta(tau).terms()) {
		for (auto& [k2, c2] : delta(key.first).terms())
			triple_add(lhs, k2.first, k2.second, key.second, c * c2);
		for (auto& [k2, c2] : delta_plus(key.second).terms())
			triple_add(rhs, key.first, k2.first, k2.second, c * c2);
	}
	return lhs == rhs;
}

bool CoproductContext::check_coassoc_plus(const TPlusSymbol& s) {
	TripleTensor<TPlusSymbol, TPlusSymbol, TPlusSymbol> lhs, rhs;
	for (auto& [key, c] : delta_plus(s).terms()) {
		for (auto& [k2, c2] : delta_plus(key.first).terms())
			triple_add(lhs, k2.first, k2.second, key.second, c * c2);
		for (auto& [k2, c2] : delta_plus(key.second).terms())
			triple_add(rhs, key.first, k2.first, k2.second, c * c2);
	}
	return lhs == rhs;
}

bool CoproductContext::check_counit(const Symbol& tau) {
	FormalSum<Rational> collapsed;
	for (auto& [key, c] : delta(tau).terms()) collapsed.add(key.first, c * counit(key.second));
	return collapsed == FormalSum<Rational>(tau);
}

} // namespace rs
