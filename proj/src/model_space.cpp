#include "rs/model_space.hpp"
#include "rs/errors.hpp"
#include <algorithm>
#include <set>

namespace rs {

namespace {

// Enumerate multisets {i1 <= i2 <= ... <= i_arity} of indices into pool and
// call fn with the product symbol. Prunes on homogeneity: pool is sorted
// ascending, every element has homogeneity >= pool.front(), so a partial
// product can be abandoned once even all-minimal completions overshoot.
void for_products(const std::vector<Symbol>& pool, int arity, const Rational& bound,
                  const Rational& kappa, const std::function<void(const Symbol&)>& fn) {
	if (pool.empty()) return;
	Rational min_hom = pool.front().homogeneity().at(kappa);
	std::function<void(std::size_t, int, const Symbol&, const Rational&)> rec =
		[&](std::size_t start, int left, const Symbol& acc, const Rational& acc_hom) {
			if (left == 0) {
				fn(acc);
				return;
			}
			for (std::size_t i = start; i < pool.size(); ++i) {
				Rational h = acc_hom + pool[i].homogeneity().at(kappa);
				Rational rest = min_hom * Rational(left - 1);
				if (h + rest > bound) break; // pool sorted: no later i can work
				rec(i, left - 1, acc * pool[i], h);
			}
		};
	rec(0, arity, Symbol::one(pool.front().dim()), Rational(0));
}

} // namespace

ModelSpace generate_model_space(const HomogeneityParams& params, const Rational& gamma,
                                std::size_t budget) {
	const int d = params.dim;
	const Rational kappa = params.kappa;
	// Working bound on U members during saturation: large enough that every
	// product retained below (triples for W, quintuples in extended mode)
	// can still reach homogeneity <= gamma when the other factors sit at the
	// minimum |I(Xi)| = -1/2 - kappa.
	const Rational b_u = params.extended ? gamma + Rational(2) + Rational(4) * kappa
	                                     : gamma + Rational(1) + Rational(2) * kappa;

	auto hom_at = [&](const Symbol& s) { return s.homogeneity().at(kappa); };

	std::set<Symbol> u_work;
	auto guard = [&](std::size_t extra) {
		if (u_work.size() + extra > budget)
			throw NonTermination("model space saturation exceeded budget of " +
			                     std::to_string(budget) + " symbols");
	};

	int poly_cap = 0;
	while (Rational(poly_cap + 1) <= b_u) ++poly_cap;
	for (const MultiIndex& k : MultiIndex::below(d, poly_cap + 1))
		u_work.insert(Symbol::poly(k));
	{
		Symbol ixi = *Symbol::I(Symbol::xi(d));
		if (hom_at(ixi) <= b_u) u_work.insert(ixi);
	}

	bool grew = true;
	while (grew) {
		grew = false;
		std::vector<Symbol> pool(u_work.begin(), u_work.end());
		std::sort(pool.begin(), pool.end(), [&](const Symbol& a, const Symbol& b) {
			return hom_at(a) < hom_at(b) || (!(hom_at(b) < hom_at(a)) && a < b);
		});
		std::vector<Symbol> fresh;
		for_products(pool, 3, b_u - Rational(2), kappa, [&](const Symbol& p) {
			if (p.is_poly_only()) return;
			Symbol t = *Symbol::I(p);
			if (hom_at(t) <= b_u && !u_work.count(t)) fresh.push_back(t);
		});
		if (params.extended) {
			// I(E(quintuple)): needs |product| + 3 <= b_u.
			for_products(pool, 5, b_u - Rational(3), kappa, [&](const Symbol& p) {
				Symbol t = *Symbol::I(Symbol::E(p));
				if (hom_at(t) <= b_u && !u_work.count(t)) fresh.push_back(t);
			});
		}
		guard(fresh.size());
		for (auto& s : fresh) grew |= u_work.insert(s).second;
	}

	ModelSpace out;
	out.params = params;
	out.gamma = gamma;

	std::vector<Symbol> pool(u_work.begin(), u_work.end());
	std::sort(pool.begin(), pool.end(), [&](const Symbol& a, const Symbol& b) {
		return hom_at(a) < hom_at(b) || (!(hom_at(b) < hom_at(a)) && a < b);
	});

	std::set<Symbol> w, w_ex;
	{
		Symbol xi = Symbol::xi(d);
		if (hom_at(xi) <= gamma) w.insert(xi);
	}
	for_products(pool, 3, gamma, kappa, [&](const Symbol& p) {
		if (hom_at(p) <= gamma) w.insert(p);
	});
	if (params.extended) {
		for_products(pool, 5, gamma - Rational(1), kappa, [&](const Symbol& p) {
			Symbol t = Symbol::E(p);
			if (hom_at(t) <= gamma) w.insert(t);
		});
		w_ex = w;
		for_products(pool, 5, gamma, kappa, [&](const Symbol& p) {
			if (hom_at(p) <= gamma) w_ex.insert(p);
		});
	} else {
		w_ex = w;
	}

	for (auto& s : u_work)
		if (hom_at(s) <= gamma) out.U.push_back(s);
	out.W.assign(w.begin(), w.end());
	out.W_ex.assign(w_ex.begin(), w_ex.end());
	return out;
}

std::vector<Symbol> ModelSpace::negative() const {
	std::set<Symbol> neg;
	auto sweep = [&](const std::vector<Symbol>& v) {
		for (auto& s : v)
			if (s.homogeneity().at(params.kappa) < Rational(0)) neg.insert(s);
	};
	sweep(U);
	sweep(W);
	return {neg.begin(), neg.end()};
}

Symbol permute_axes(const Symbol& s, const std::vector<int>& perm) {
	MultiIndex k = s.poly_part();
	MultiIndex pk = MultiIndex::zero(k.dim);
	pk.k[0] = k.k[0];
	for (int i = 1; i <= k.dim; ++i) pk.k[perm[i - 1]] = k.k[i];
	std::vector<Symbol::Factor> fs;
	for (const auto& f : s.factors()) {
		Symbol::Factor g = f;
		if (f.arg) g.arg = std::make_shared<const Symbol>(permute_axes(*f.arg, perm));
		fs.push_back(g);
	}
	return Symbol::make(pk, std::move(fs));
}

namespace {

bool product_of_u(const Symbol& tau, int max_slots, bool extended);

bool u_sector(const Symbol& tau, bool extended) {
	if (tau.is_poly_only()) return true;
	if (!tau.poly_part().is_zero()) return false;
	if (tau.factors().size() != 1 || tau.factors()[0].mult != 1) return false;
	const auto& f = tau.factors()[0];
	if (f.kind != Symbol::FactorKind::IntI) return false;
	const Symbol& a = *f.arg;
	if (a == Symbol::xi(tau.dim())) return true;
	if (extended && a.poly_part().is_zero() && a.factors().size() == 1 &&
	    a.factors()[0].mult == 1 && a.factors()[0].kind == Symbol::FactorKind::IntE)
		return product_of_u(*a.factors()[0].arg, 5, extended);
	return product_of_u(a, 3, extended);
}

bool product_of_u(const Symbol& tau, int max_slots, bool extended) {
	int slots = tau.poly_part().is_zero() ? 0 : 1;
	for (const auto& f : tau.factors()) {
		slots += f.mult;
		if (slots > max_slots) return false;
		Symbol unit_factor = Symbol::make(MultiIndex::zero(tau.dim()), {{f.kind, f.arg, 1}});
		if (!u_sector(unit_factor, extended)) return false;
	}
	return slots <= max_slots;
}

} // namespace

bool in_u_sector(const Symbol& tau, bool extended) { return u_sector(tau, extended); }

bool in_w_sector(const Symbol& tau, bool extended) {
	if (tau == Symbol::xi(tau.dim())) return true;
	if (extended && tau.poly_part().is_zero() && tau.factors().size() == 1 &&
	    tau.factors()[0].mult == 1 && tau.factors()[0].kind == Symbol::FactorKind::IntE)
		return product_of_u(*tau.factors()[0].arg, 5, extended);
	return product_of_u(tau, 3, extended);
}

std::vector<CensusEntry> group_by_axis_symmetry(const std::vector<Symbol>& syms) {
	if (syms.empty()) return {};
	int d = syms.front().dim();
	std::vector<int> perm(d);
	for (int i = 0; i < d; ++i) perm[i] = i + 1;
	std::vector<std::vector<int>> perms;
	do perms.push_back(perm);
	while (std::next_permutation(perm.begin(), perm.end()));

	std::map<Symbol, CensusEntry> orbits; // representative -> entry
	for (auto& s : syms) {
		Symbol rep = s;
		for (auto& p : perms) {
			Symbol t = permute_axes(s, p);
			if (t.render() < rep.render()) rep = t;
		}
		auto it = orbits.find(rep);
		if (it == orbits.end()) orbits.emplace(rep, CensusEntry{rep, 1});
		else it->second.multiplicity += 1;
	}
	std::vector<CensusEntry> out;
	for (auto& [rep, e] : orbits) out.push_back(e);
	return out;
}

} // namespace rs
