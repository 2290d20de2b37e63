#pragma once
#include "rs/rational.hpp"
#include <map>
#include <tuple>

namespace rs {

/// Formal linear combination of pure tensors L ⊗ R with rational
/// coefficients. Componentwise product makes it the tensor-square algebra.
template <class L, class R>
class Tensor {
public:
	using Key = std::pair<L, R>;

	Tensor() = default;
	Tensor(const L& l, const R& r, Rational c = Rational(1)) { add(l, r, c); }

	void add(const L& l, const R& r, const Rational& c) {
		if (c.is_zero()) return;
		Key k{l, r};
		auto it = terms_.find(k);
		if (it == terms_.end()) terms_.emplace(k, c);
		else {
			it->second += c;
			if (it->second.is_zero()) terms_.erase(it);
		}
	}
	void add(const Tensor& o, const Rational& scale = Rational(1)) {
		for (auto& [k, c] : o.terms_) add(k.first, k.second, c * scale);
	}
	Tensor operator+(const Tensor& o) const { Tensor t = *this; t.add(o); return t; }
	Tensor operator-(const Tensor& o) const { Tensor t = *this; t.add(o, Rational(-1)); return t; }
	Tensor operator*(const Tensor& o) const {
		Tensor t;
		for (auto& [k1, c1] : terms_)
			for (auto& [k2, c2] : o.terms_)
				t.add(k1.first * k2.first, k1.second * k2.second, c1 * c2);
		return t;
	}
	Tensor pow_times(const Tensor& unit, int n) const {
		Tensor t = unit;
		for (int i = 0; i < n; ++i) t = t * (*this);
		return t;
	}

	bool is_zero() const { return terms_.empty(); }
	std::size_t size() const { return terms_.size(); }
	const std::map<Key, Rational>& terms() const { return terms_; }
	Rational coeff(const L& l, const R& r) const {
		auto it = terms_.find(Key{l, r});
		return it == terms_.end() ? Rational(0) : it->second;
	}
	bool operator==(const Tensor& o) const { return terms_ == o.terms_; }

private:
	std::map<Key, Rational> terms_;
};

/// Threefold tensors, used only to state coassociativity.
template <class A, class B, class C>
using TripleTensor = std::map<std::tuple<A, B, C>, Rational>;

template <class A, class B, class C>
void triple_add(TripleTensor<A, B, C>& t, const A& a, const B& b, const C& c, const Rational& v) {
	if (v.is_zero()) return;
	auto key = std::make_tuple(a, b, c);
	auto it = t.find(key);
	if (it == t.end()) t.emplace(key, v);
	else {
		it->second += v;
		if (it->second.is_zero()) t.erase(it);
	}
}

} // namespace rs
