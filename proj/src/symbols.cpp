#include "rs/symbols.hpp"
#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace rs {

std::string MultiIndex::str() const {
	std::ostringstream os;
	os << '(';
	for (int i = 0; i <= dim; ++i) {
		if (i) os << ',';
		os << k[i];
	}
	os << ')';
	return os.str();
}

std::vector<MultiIndex> MultiIndex::below(int dim, int scaled_bound) {
	// All k with 2*k0 + k1 + ... + kd < scaled_bound, graded enumeration.
	std::vector<MultiIndex> out;
	MultiIndex cur = MultiIndex::zero(dim);
	std::function<void(int, int)> rec = [&](int axis, int used) {
		if (axis > dim) {
			out.push_back(cur);
			return;
		}
		int w = (axis == 0) ? 2 : 1;
		for (int v = 0; used + v * w < scaled_bound; ++v) {
			cur.k[axis] = v;
			rec(axis + 1, used + v * w);
		}
		cur.k[axis] = 0;
	};
	rec(0, 0);
	std::sort(out.begin(), out.end(), [](const MultiIndex& a, const MultiIndex& b) {
		if (a.scaled_degree() != b.scaled_degree()) return a.scaled_degree() < b.scaled_degree();
		return a.k < b.k;
	});
	return out;
}

std::string Homogeneity::str() const {
	std::ostringstream os;
	os << a.str();
	if (!b.is_zero()) {
		os << (b.num() > 0 ? "+" : "-");
		Rational ab = b.num() > 0 ? b : b * Rational(-1);
		if (!(ab == Rational(1))) os << ab.str() << "*";
		os << "kappa";
	}
	return os.str();
}

std::string factor_render(const Symbol::Factor& f) {
	switch (f.kind) {
	case Symbol::FactorKind::Noise: return "Xi";
	case Symbol::FactorKind::IntI: return "I(" + f.arg->render() + ")";
	case Symbol::FactorKind::IntE: return "E(" + f.arg->render() + ")";
	}
	return {};
}

Homogeneity factor_homogeneity(const Symbol::Factor& f) {
	switch (f.kind) {
	case Symbol::FactorKind::Noise: return HomogeneityParams{}.xi_hom();
	case Symbol::FactorKind::IntI: return f.arg->homogeneity() + Homogeneity{Rational(2), Rational(0)};
	case Symbol::FactorKind::IntE: return f.arg->homogeneity() + Homogeneity{Rational(1), Rational(0)};
	}
	return {};
}

namespace {

int factor_int_count(const Symbol::Factor& f) {
	if (f.kind == Symbol::FactorKind::Noise) return 0;
	return 1 + f.arg->integration_count();
}

struct Piece {
	Homogeneity hom;
	std::string text;
};

bool piece_less(const Piece& x, const Piece& y) {
	if (!(x.hom.a == y.hom.a)) return x.hom.a < y.hom.a;
	if (!(x.hom.b == y.hom.b)) return x.hom.b < y.hom.b;
	return x.text < y.text;
}

} // namespace

Symbol Symbol::intern(Node n) {
	// Canonicalise: sort factors by (homogeneity, render), merge duplicates.
	std::stable_sort(n.factors.begin(), n.factors.end(), [](const Factor& a, const Factor& b) {
		Piece pa{factor_homogeneity(a), factor_render(a)};
		Piece pb{factor_homogeneity(b), factor_render(b)};
		return piece_less(pa, pb);
	});
	std::vector<Factor> merged;
	for (auto& f : n.factors) {
		if (f.mult <= 0) continue;
		if (!merged.empty() && merged.back().kind == f.kind &&
			factor_render(merged.back()) == factor_render(f))
			merged.back().mult += f.mult;
		else
			merged.push_back(f);
	}
	n.factors = std::move(merged);

	n.hom = Homogeneity{Rational(n.poly.scaled_degree()), Rational(0)};
	n.int_count = 0;
	for (auto& f : n.factors) {
		Homogeneity fh = factor_homogeneity(f);
		n.hom = n.hom + Homogeneity{fh.a * Rational(f.mult), fh.b * Rational(f.mult)};
		n.int_count += f.mult * factor_int_count(f);
	}

	std::vector<Piece> pieces;
	for (int i = 0; i <= n.poly.dim; ++i) {
		if (n.poly.k[i] == 0) continue;
		std::string t = "X_" + std::to_string(i);
		if (n.poly.k[i] > 1) t += "^" + std::to_string(n.poly.k[i]);
		pieces.push_back({Homogeneity{Rational(i == 0 ? 2 : 1), Rational(0)}, t});
	}
	for (auto& f : n.factors) {
		std::string t = factor_render(f);
		if (f.mult > 1) t += "^" + std::to_string(f.mult);
		pieces.push_back({factor_homogeneity(f), t});
	}
	std::sort(pieces.begin(), pieces.end(), piece_less);
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

	Symbol s;
	s.p_ = std::make_shared<const Node>(std::move(n));
	return s;
}

Symbol Symbol::one(int dim) {
	Node n;
	n.poly = MultiIndex::zero(dim);
	return intern(std::move(n));
}

Symbol Symbol::xi(int dim) {
	Node n;
	n.poly = MultiIndex::zero(dim);
	n.factors.push_back({FactorKind::Noise, nullptr, 1});
	return intern(std::move(n));
}

Symbol Symbol::poly(const MultiIndex& k) {
	Node n;
	n.poly = k;
	return intern(std::move(n));
}

std::optional<Symbol> Symbol::I(const Symbol& arg) {
	if (arg.is_poly_only()) return std::nullopt;
	Node n;
	n.poly = MultiIndex::zero(arg.dim());
	n.factors.push_back({FactorKind::IntI, std::make_shared<const Symbol>(arg), 1});
	return intern(std::move(n));
}

Symbol Symbol::E(const Symbol& arg) {
	Node n;
	n.poly = MultiIndex::zero(arg.dim());
	n.factors.push_back({FactorKind::IntE, std::make_shared<const Symbol>(arg), 1});
	return intern(std::move(n));
}

Symbol Symbol::operator*(const Symbol& o) const {
	if (dim() != o.dim()) throw std::invalid_argument("symbol dimension mismatch");
	Node n;
	n.poly = p_->poly + o.p_->poly;
	n.factors = p_->factors;
	n.factors.insert(n.factors.end(), o.p_->factors.begin(), o.p_->factors.end());
	return intern(std::move(n));
}

Symbol Symbol::pow(int n) const {
	Symbol r = one(dim());
	for (int i = 0; i < n; ++i) r = r * (*this);
	return r;
}

Symbol Symbol::without_poly() const {
	Node n;
	n.poly = MultiIndex::zero(dim());
	n.factors = p_->factors;
	return intern(std::move(n));
}

Symbol Symbol::make(const MultiIndex& poly, std::vector<Factor> factors) {
	Node n;
	n.poly = poly;
	n.factors = std::move(factors);
	return intern(std::move(n));
}

bool Symbol::operator==(const Symbol& o) const {
	if (p_ == o.p_) return true;
	return dim() == o.dim() && p_->render == o.p_->render;
}

bool Symbol::operator<(const Symbol& o) const {
	if (p_ == o.p_) return false;
	if (!(p_->hom.a == o.p_->hom.a)) return p_->hom.a < o.p_->hom.a;
	if (!(p_->hom.b == o.p_->hom.b)) return p_->hom.b < o.p_->hom.b;
	if (p_->render != o.p_->render) return p_->render < o.p_->render;
	return dim() < o.dim();
}

// ---------------------------------------------------------------------------
// Parser for the render grammar:
//   product := power ('*' power)*
//   power   := atom ('^' nat)?
//   atom    := 'Xi' | '1' | 'X_' nat | 'I(' product ')' | 'E(' product ')'
// Returns a FormalSum so that I(poly-only) collapses to zero.

namespace {

struct Parser {
	const std::string& s;
	std::size_t i = 0;
	int dim;
	bool ok = true;

	void skip() {
		while (i < s.size() && s[i] == ' ') ++i;
	}
	bool eat(char c) {
		skip();
		if (i < s.size() && s[i] == c) {
			++i;
			return true;
		}
		return false;
	}
	bool lit(const char* t) {
		skip();
		std::size_t n = std::string(t).size();
		if (s.compare(i, n, t) == 0) {
			i += n;
			return true;
		}
		return false;
	}
	int nat() {
		skip();
		if (i >= s.size() || !isdigit(static_cast<unsigned char>(s[i]))) {
			ok = false;
			return 0;
		}
		int v = 0;
		while (i < s.size() && isdigit(static_cast<unsigned char>(s[i]))) {
			v = v * 10 + (s[i] - '0');
			++i;
		}
		return v;
	}

	FormalSum<Rational> product() {
		FormalSum<Rational> r = power();
		while (ok && eat('*')) r = r * power();
		return r;
	}
	FormalSum<Rational> power() {
		FormalSum<Rational> a = atom();
		if (ok && eat('^')) {
			int n = nat();
			if (!ok) return {};
			a = a.pow(n);
		}
		return a;
	}
	FormalSum<Rational> atom() {
		skip();
		if (lit("Xi")) return FormalSum<Rational>(Symbol::xi(dim));
		if (lit("X_")) {
			int a = nat();
			if (!ok || a > dim) {
				ok = false;
				return {};
			}
			return FormalSum<Rational>(Symbol::X(dim, a));
		}
		if (lit("I(")) {
			FormalSum<Rational> inner = product();
			if (!ok || !eat(')')) {
				ok = false;
				return {};
			}
			return apply_I(inner);
		}
		if (lit("E(")) {
			FormalSum<Rational> inner = product();
			if (!ok || !eat(')')) {
				ok = false;
				return {};
			}
			return apply_E(inner);
		}
		if (lit("1")) return FormalSum<Rational>(Symbol::one(dim));
		ok = false;
		return {};
	}
};

} // namespace

std::optional<FormalSum<Rational>> parse_symbol(const std::string& text, int dim) {
	Parser p{text, 0, dim};
	FormalSum<Rational> r = p.product();
	p.skip();
	if (!p.ok || p.i != text.size()) return std::nullopt;
	return r;
}

} // namespace rs
