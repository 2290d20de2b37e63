#pragma once
#include "rs/rational.hpp"
#include <array>
#include <vector>
#include <string>
#include <compare>

namespace rs {

/// Space-time multi-index, time component first. Parabolic scaling: the time
/// direction counts twice in the scaled degree |k|_s = 2*k[0] + k[1] + ... + k[d].
struct MultiIndex {
	std::array<int, 4> k{0, 0, 0, 0};
	int dim = 3; // spatial dimension d; entries 0..d are meaningful

	int scaled_degree() const {
		int s = 2 * k[0];
		for (int i = 1; i <= dim; ++i) s += k[i];
		return s;
	}
	int total_degree() const {
		int s = 0;
		for (int i = 0; i <= dim; ++i) s += k[i];
		return s;
	}
	bool is_zero() const {
		for (int i = 0; i <= dim; ++i) if (k[i] != 0) return false;
		return true;
	}
	MultiIndex operator+(const MultiIndex& o) const {
		MultiIndex r = *this;
		for (int i = 0; i <= dim; ++i) r.k[i] += o.k[i];
		return r;
	}
	bool operator==(const MultiIndex& o) const { return dim == o.dim && k == o.k; }
	auto operator<=>(const MultiIndex& o) const = default;

	Rational fact() const {
		Rational r(1);
		for (int i = 0; i <= dim; ++i) r *= factorial(k[i]);
		return r;
	}
	std::string str() const; // e.g. "(1,0,2,0)"

	static MultiIndex zero(int dim) { MultiIndex m; m.dim = dim; return m; }
	static MultiIndex unit(int dim, int axis) { MultiIndex m; m.dim = dim; m.k[axis] = 1; return m; }
	/// All multi-indices with scaled degree < bound (bound <= some small cap).
	static std::vector<MultiIndex> below(int dim, int bound);
};

/// Homogeneity a + b*kappa, exact in Q + Q*kappa. The order used everywhere is
/// evaluation at the working kappa (exact rational comparison); ties cannot
/// occur for distinct (a,b) once kappa is irrational-like small rational unless
/// the values genuinely coincide.
struct Homogeneity {
	Rational a; // kappa-free part
	Rational b; // coefficient of kappa (integer-valued for all generated symbols)

	Homogeneity() = default;
	Homogeneity(Rational a_, Rational b_) : a(a_), b(b_) {}

	Homogeneity operator+(const Homogeneity& o) const { return {a + o.a, b + o.b}; }
	Homogeneity operator-(const Homogeneity& o) const { return {a - o.a, b - o.b}; }
	bool operator==(const Homogeneity& o) const { return a == o.a && b == o.b; }

	Rational at(const Rational& kappa) const { return a + b * kappa; }
	std::string str() const; // "-5/2-1k" style
};

/// Global parameters of the symbol algebra.
struct HomogeneityParams {
	int dim = 3;                       // spatial dimension
	Rational kappa = Rational(1, 100); // regularity shift, in (0, 1/50]
	bool extended = false;             // enable the E symbol (order-1 integration)

	Homogeneity xi_hom() const { return {Rational(-5, 2), Rational(-1)}; }
	int integration_order_I() const { return 2; }
	int integration_order_E() const { return 1; }
};

} // namespace rs
