#pragma once
#include "rs/homogeneity.hpp"
#include <map>
#include <memory>
#include <optional>
#include <functional>

namespace rs {

/// Canonical abstract symbol: a commutative monomial
///     X^k * prod_i f_i^{m_i}
/// where each prime factor f_i is the noise, an I(.) integration node or an
/// E(.) extension node. The unit is the empty monomial. Products are kept
/// flat and the factor list sorted, so structural equality is string equality
/// of the render. Immutable; cheap to copy.
class Symbol {
public:
	enum class FactorKind { Noise, IntI, IntE };
	struct Factor {
		FactorKind kind;
		std::shared_ptr<const Symbol> arg; // null for Noise
		int mult;
	};

	Symbol() = default; // invalid; use constructors below

	static Symbol one(int dim);
	static Symbol xi(int dim);
	static Symbol poly(const MultiIndex& k);
	static Symbol X(int dim, int axis) { return poly(MultiIndex::unit(dim, axis)); }
	/// I applied to a polynomial-only symbol is zero; call sites that need the
	/// zero-absorbing behaviour should use apply_I on a FormalSum instead.
	static std::optional<Symbol> I(const Symbol& arg);
	static Symbol E(const Symbol& arg);
	Symbol operator*(const Symbol& o) const;
	Symbol pow(int n) const;

	bool valid() const { return p_ != nullptr; }
	int dim() const { return p_->poly.dim; }
	const MultiIndex& poly_part() const { return p_->poly; }
	const std::vector<Factor>& factors() const { return p_->factors; }
	bool is_one() const { return p_->poly.is_zero() && p_->factors.empty(); }
	bool is_poly_only() const { return p_->factors.empty(); }
	/// Number of I/E nodes in the whole tree (the grading used for the
	/// triangular inversion of characters).
	int integration_count() const { return p_->int_count; }

	const Homogeneity& homogeneity() const { return p_->hom; }
	const std::string& render() const { return p_->render; }

	/// Strip the poly part (X^0 version of this symbol).
	Symbol without_poly() const;
	/// Replace factor list wholesale (used by the substitution engine).
	static Symbol make(const MultiIndex& poly, std::vector<Factor> factors);

	bool operator==(const Symbol& o) const;
	bool operator<(const Symbol& o) const; // (hom at kappa=0, kappa coeff, render)

private:
	struct Node {
		MultiIndex poly;
		std::vector<Factor> factors;
		Homogeneity hom;
		std::string render;
		int int_count = 0;
	};
	std::shared_ptr<const Node> p_;
	static Symbol intern(Node n);
	friend struct SymbolHash;
};

/// Render of a single prime factor ("Xi", "I(...)", "E(...)").
std::string factor_render(const Symbol::Factor& f);
Homogeneity factor_homogeneity(const Symbol::Factor& f);

/// Parse of the render grammar; returns std::nullopt on syntax error.
/// "I(X_1)" parses to the zero sum, hence the sum-valued interface.
template <class C> class FormalSum;
std::optional<FormalSum<Rational>> parse_symbol(const std::string& text, int dim);

template <class C> bool coeff_is_zero(const C& c) { return c == C(0); }
inline bool coeff_is_zero(const Rational& c) { return c.is_zero(); }

/// Finite formal linear combination of symbols with coefficients in C.
template <class C>
class FormalSum {
public:
	FormalSum() = default;
	explicit FormalSum(const Symbol& s, C c = C(1)) { add(s, c); }

	void add(const Symbol& s, const C& c) {
		if (coeff_is_zero(c)) return;
		auto it = terms_.find(s);
		if (it == terms_.end()) terms_.emplace(s, c);
		else {
			it->second += c;
			if (coeff_is_zero(it->second)) terms_.erase(it);
		}
	}
	void add(const FormalSum& o, const C& scale = C(1)) {
		for (auto& [s, c] : o.terms_) add(s, c * scale);
	}
	FormalSum operator+(const FormalSum& o) const { FormalSum r = *this; r.add(o); return r; }
	FormalSum operator-(const FormalSum& o) const { FormalSum r = *this; r.add(o, C(-1)); return r; }
	FormalSum operator*(const C& c) const {
		FormalSum r;
		for (auto& [s, v] : terms_) r.add(s, v * c);
		return r;
	}
	FormalSum operator*(const FormalSum& o) const {
		FormalSum r;
		for (auto& [s1, c1] : terms_)
			for (auto& [s2, c2] : o.terms_) r.add(s1 * s2, c1 * c2);
		return r;
	}
	FormalSum pow(int n) const {
		FormalSum r(Symbol::one(dim_hint()));
		for (int i = 0; i < n; ++i) r = r * (*this);
		return r;
	}

	bool is_zero() const { return terms_.empty(); }
	std::size_t size() const { return terms_.size(); }
	const std::map<Symbol, C>& terms() const { return terms_; }
	C coeff(const Symbol& s) const {
		auto it = terms_.find(s);
		return it == terms_.end() ? C(0) : it->second;
	}
	bool operator==(const FormalSum& o) const { return terms_ == o.terms_; }

	FormalSum filtered(const std::function<bool(const Symbol&)>& keep) const {
		FormalSum r;
		for (auto& [s, c] : terms_) if (keep(s)) r.add(s, c);
		return r;
	}
	/// Keep terms with homogeneity (at the working kappa) <= bound.
	FormalSum truncated(const Rational& bound, const Rational& kappa) const {
		return filtered([&](const Symbol& s) { return s.homogeneity().at(kappa) <= bound; });
	}

	int dim_hint() const { return terms_.empty() ? 3 : terms_.begin()->first.dim(); }

private:
	std::map<Symbol, C> terms_;
};

/// I lifted to sums: polynomial-only arguments are annihilated.
template <class C>
FormalSum<C> apply_I(const FormalSum<C>& f) {
	FormalSum<C> r;
	for (auto& [s, c] : f.terms())
		if (auto t = Symbol::I(s)) r.add(*t, c);
	return r;
}
template <class C>
FormalSum<C> apply_E(const FormalSum<C>& f) {
	FormalSum<C> r;
	for (auto& [s, c] : f.terms()) r.add(Symbol::E(s), c);
	return r;
}

inline std::string coeff_str(const Rational& c) { return c.str(); }
inline std::string coeff_str(double c) { return std::to_string(c); }

template <class C>
std::string render_sum(const FormalSum<C>& f) {
	if (f.is_zero()) return "0";
	std::string out;
	for (auto& [s, c] : f.terms()) {
		if (!out.empty()) out += " + ";
		std::string cs = coeff_str(c);
		if (cs == "1" && !s.is_one()) out += s.render();
		else if (s.is_one()) out += cs;
		else out += cs + "*" + s.render();
	}
	return out;
}

} // namespace rs
