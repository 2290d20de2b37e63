#pragma once
#include <cstdint>
#include <stdexcept>
#include <string>
#include <numeric>
#include <iosfwd>

namespace rs {

/// Exact rational on int64 with overflow detection (throws on overflow).
/// All symbolic layers of the library run on this type; nothing here is
/// allowed to fall back to floating point silently.
class Rational {
public:
	constexpr Rational() : num_(0), den_(1) {}
	constexpr Rational(std::int64_t n) : num_(n), den_(1) {}
	Rational(std::int64_t n, std::int64_t d);

	std::int64_t num() const { return num_; }
	std::int64_t den() const { return den_; }

	bool is_zero() const { return num_ == 0; }
	bool is_integer() const { return den_ == 1; }
	int sign() const { return num_ > 0 ? 1 : (num_ < 0 ? -1 : 0); }

	Rational operator-() const;
	Rational& operator+=(const Rational& o) { *this = *this + o; return *this; }
	Rational& operator-=(const Rational& o) { *this = *this - o; return *this; }
	Rational& operator*=(const Rational& o) { *this = *this * o; return *this; }
	Rational& operator/=(const Rational& o) { *this = *this / o; return *this; }

	friend Rational operator+(const Rational& a, const Rational& b);
	friend Rational operator-(const Rational& a, const Rational& b);
	friend Rational operator*(const Rational& a, const Rational& b);
	friend Rational operator/(const Rational& a, const Rational& b);
	friend bool operator==(const Rational& a, const Rational& b) {
		return a.num_ == b.num_ && a.den_ == b.den_;
	}
	friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }
	friend bool operator<(const Rational& a, const Rational& b);
	friend bool operator<=(const Rational& a, const Rational& b) { return a < b || a == b; }
	friend bool operator>(const Rational& a, const Rational& b) { return b < a; }
	friend bool operator>=(const Rational& a, const Rational& b) { return b <= a; }

	double to_double() const { return double(num_) / double(den_); }
	std::string str() const;

	static Rational parse(const std::string& s); // "a", "a/b", "-a/b"

private:
	std::int64_t num_, den_; // den_ > 0, gcd(|num_|, den_) == 1
	static std::int64_t checked(__int128 v);
};

std::ostream& operator<<(std::ostream& os, const Rational& r);

Rational binomial(int n, int k);
Rational factorial(int n);

} // namespace rs
