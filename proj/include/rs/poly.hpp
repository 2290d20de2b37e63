#pragma once
#include "rs/rational.hpp"
#include <map>
#include <string>
#include <vector>
#include <algorithm>

namespace rs {

/// Sparse multivariate polynomial over the rationals with string-named
/// variables. Used as the coefficient ring for symbolic renormalisation:
/// variables C1..C5 (or Ct1..Ct4), the quintic coupling a, and the formal
/// solution jet phi, dphi1..dphid.
class Poly {
public:
	using Mono = std::vector<std::pair<std::string, int>>; // sorted, exps > 0

	Poly() = default;
	Poly(const Rational& c) {
		if (!c.is_zero()) terms_.emplace(Mono{}, c);
	}
	Poly(std::int64_t c) : Poly(Rational(c)) {}
	static Poly var(const std::string& name, int exp = 1) {
		Poly p;
		if (exp == 0) return Poly(1);
		p.terms_.emplace(Mono{{name, exp}}, Rational(1));
		return p;
	}

	bool is_zero() const { return terms_.empty(); }
	bool is_constant() const {
		return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first.empty());
	}
	Rational constant_part() const {
		auto it = terms_.find(Mono{});
		return it == terms_.end() ? Rational(0) : it->second;
	}
	const std::map<Mono, Rational>& terms() const { return terms_; }

	Poly& operator+=(const Poly& o) {
		for (auto& [m, c] : o.terms_) add(m, c);
		return *this;
	}
	Poly& operator-=(const Poly& o) {
		for (auto& [m, c] : o.terms_) add(m, -c);
		return *this;
	}
	friend Poly operator+(Poly a, const Poly& b) { return a += b; }
	friend Poly operator-(Poly a, const Poly& b) { return a -= b; }
	friend Poly operator-(const Poly& a) { return Poly(0) - a; }
	friend Poly operator*(const Poly& a, const Poly& b) {
		Poly r;
		for (auto& [m1, c1] : a.terms_)
			for (auto& [m2, c2] : b.terms_) r.add(mono_mul(m1, m2), c1 * c2);
		return r;
	}
	Poly& operator*=(const Poly& o) { return *this = *this * o; }
	Poly pow(int n) const {
		Poly r(1);
		for (int i = 0; i < n; ++i) r = r * (*this);
		return r;
	}

	bool operator==(const Poly& o) const { return terms_ == o.terms_; }
	bool operator!=(const Poly& o) const { return !(*this == o); }

	/// Substitute a polynomial for a variable.
	Poly subst(const std::string& name, const Poly& value) const {
		Poly r;
		for (auto& [m, c] : terms_) {
			Poly t(c);
			Poly vpow(1);
			for (auto& [v, e] : m) {
				if (v == name)
					vpow = value.pow(e);
				else
					t *= var(v, e);
			}
			r += t * vpow;
		}
		return r;
	}

	/// Coefficient of name^exp, as a polynomial in the remaining variables;
	/// exp = 0 collects the part free of the variable.
	Poly coeff_of(const std::string& name, int exp) const {
		Poly r;
		for (auto& [m, c] : terms_) {
			int e = 0;
			Mono rest;
			for (auto& [v, p] : m)
				if (v == name)
					e = p;
				else
					rest.push_back({v, p});
			if (e == exp) r.add(rest, c);
		}
		return r;
	}

	bool depends_on(const std::string& name) const {
		for (auto& [m, c] : terms_)
			for (auto& [v, p] : m)
				if (v == name) return true;
		return false;
	}

	double eval(const std::map<std::string, double>& values) const {
		double out = 0;
		for (auto& [m, c] : terms_) {
			double t = c.to_double();
			for (auto& [v, e] : m) {
				auto it = values.find(v);
				double x = it == values.end() ? 0.0 : it->second;
				for (int i = 0; i < e; ++i) t *= x;
			}
			out += t;
		}
		return out;
	}

	std::string str() const {
		if (terms_.empty()) return "0";
		std::string out;
		for (auto& [m, c] : terms_) {
			std::string t;
			if (m.empty())
				t = c.str();
			else {
				if (c == Rational(-1))
					t = "-";
				else if (!(c == Rational(1)))
					t = c.str() + "*";
				for (std::size_t i = 0; i < m.size(); ++i) {
					if (i) t += "*";
					t += m[i].first;
					if (m[i].second > 1) t += "^" + std::to_string(m[i].second);
				}
			}
			if (out.empty())
				out = t;
			else if (!t.empty() && t[0] == '-')
				out += " - " + (t.substr(1) == "" ? "1" : t.substr(1));
			else
				out += " + " + t;
		}
		return out;
	}

private:
	std::map<Mono, Rational> terms_;

	void add(const Mono& m, const Rational& c) {
		if (c.is_zero()) return;
		auto it = terms_.find(m);
		if (it == terms_.end()) terms_.emplace(m, c);
		else {
			it->second += c;
			if (it->second.is_zero()) terms_.erase(it);
		}
	}
	static Mono mono_mul(const Mono& a, const Mono& b) {
		Mono r = a;
		for (auto& [v, e] : b) {
			auto it = std::find_if(r.begin(), r.end(), [&](auto& p) { return p.first == v; });
			if (it == r.end()) r.push_back({v, e});
			else it->second += e;
		}
		std::sort(r.begin(), r.end());
		return r;
	}
};

inline bool coeff_is_zero(const Poly& p) { return p.is_zero(); }
inline std::string coeff_str(const Poly& p) { return "(" + p.str() + ")"; }

/// Hermite polynomial H_n(x, c) with variance parameter c:
/// H_0 = 1, H_1 = x, H_{n+1} = x H_n - n c H_{n-1}.
inline Poly hermite_poly(int n, const Poly& x, const Poly& c) {
	Poly hm(1), h = x;
	if (n == 0) return hm;
	for (int k = 1; k < n; ++k) {
		Poly next = x * h - Poly(k) * c * hm;
		hm = h;
		h = next;
	}
	return h;
}

} // namespace rs
