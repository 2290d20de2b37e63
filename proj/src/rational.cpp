#include "rs/rational.hpp"
#include <ostream>
#include <limits>

namespace rs {

std::int64_t Rational::checked(__int128 v) {
	if (v > std::numeric_limits<std::int64_t>::max() || v < std::numeric_limits<std::int64_t>::min())
		throw std::overflow_error("Rational: int64 overflow");
	return std::int64_t(v);
}

Rational::Rational(std::int64_t n, std::int64_t d) {
	if (d == 0) throw std::domain_error("Rational: zero denominator");
	if (d < 0) { n = -n; d = -d; }
	std::int64_t g = std::gcd(n < 0 ? -n : n, d);
	if (g > 1) { n /= g; d /= g; }
	num_ = n; den_ = d;
}

Rational Rational::operator-() const {
	Rational r; r.num_ = -num_; r.den_ = den_; return r;
}

Rational operator+(const Rational& a, const Rational& b) {
	__int128 n = (__int128)a.num_ * b.den_ + (__int128)b.num_ * a.den_;
	__int128 d = (__int128)a.den_ * b.den_;
	__int128 g = std::gcd((std::int64_t)(n < 0 ? Rational::checked(-n) : Rational::checked(n)), Rational::checked(d));
	if (g > 1) { n /= g; d /= g; }
	Rational r; r.num_ = Rational::checked(n); r.den_ = Rational::checked(d); return r;
}

Rational operator-(const Rational& a, const Rational& b) { return a + (-b); }

Rational operator*(const Rational& a, const Rational& b) {
	// cross-reduce before multiplying to keep intermediates small
	std::int64_t g1 = std::gcd(a.num_ < 0 ? -a.num_ : a.num_, b.den_);
	std::int64_t g2 = std::gcd(b.num_ < 0 ? -b.num_ : b.num_, a.den_);
	__int128 n = (__int128)(a.num_ / g1) * (b.num_ / g2);
	__int128 d = (__int128)(a.den_ / g2) * (b.den_ / g1);
	Rational r; r.num_ = Rational::checked(n); r.den_ = Rational::checked(d); return r;
}

Rational operator/(const Rational& a, const Rational& b) {
	if (b.num_ == 0) throw std::domain_error("Rational: division by zero");
	Rational inv;
	std::int64_t n = b.den_, d = b.num_;
	if (d < 0) { n = -n; d = -d; }
	inv.num_ = n; inv.den_ = d;
	return a * inv;
}

bool operator<(const Rational& a, const Rational& b) {
	return (__int128)a.num_ * b.den_ < (__int128)b.num_ * a.den_;
}

std::string Rational::str() const {
	if (den_ == 1) return std::to_string(num_);
	return std::to_string(num_) + "/" + std::to_string(den_);
}

Rational Rational::parse(const std::string& s) {
	auto slash = s.find('/');
	if (slash == std::string::npos) return Rational(std::stoll(s));
	return Rational(std::stoll(s.substr(0, slash)), std::stoll(s.substr(slash + 1)));
}

std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.str(); }

Rational binomial(int n, int k) {
	if (k < 0 || k > n) return Rational(0);
	Rational r(1);
	for (int i = 0; i < k; ++i) r = r * Rational(n - i) / Rational(i + 1);
	return r;
}

Rational factorial(int n) {
	Rational r(1);
	for (int i = 2; i <= n; ++i) r *= Rational(i);
	return r;
}

} // namespace rs
