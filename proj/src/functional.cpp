#include "rs/functional.hpp"

namespace rs {

Rational Character::operator()(const TPlusSymbol& s) const {
	auto it = state_->memo.find(s);
	if (it != state_->memo.end()) return it->second;

	Rational v(1);
	const int d = s.dim();
	for (int i = 0; i <= d; ++i) {
		int p = s.poly_part().k[i];
		if (p == 0) continue;
		Rational g = state_->gen(TPlusSymbol::X(d, i));
		for (int j = 0; j < p; ++j) v *= g;
	}
	for (const auto& f : s.factors()) {
		// J() cannot fail: the factor exists, so it is admissible, and
		// admissibility does not depend on kappa within the allowed range.
		TPlusSymbol single = *TPlusSymbol::J(f.kind, f.label, *f.arg, Rational(1, 100));
		Rational g = state_->gen(single);
		for (int j = 0; j < f.mult; ++j) v *= g;
	}
	state_->memo.emplace(s, v);
	return v;
}

Character Character::counit(int dim) {
	(void)dim;
	return Character([](const TPlusSymbol&) { return Rational(0); });
}

Character convolve(const Character& f, const Character& g,
                   std::shared_ptr<CoproductContext> ctx) {
	return Character([f, g, ctx](const TPlusSymbol& gen) {
		Rational v(0);
		for (auto& [key, c] : ctx->delta_plus(gen).terms())
			v += c * f(key.first) * g(key.second);
		return v;
	});
}

Character convolution_inverse(const Character& f, std::shared_ptr<CoproductContext> ctx) {
	// inv(h) = -f(h) - sum' f(h1) inv(h2) over the middle terms of Delta+ h,
	// where inv on the right legs is the multiplicative extension. Right legs
	// are strictly smaller (fewer integrations, or a strictly larger label),
	// so the recursion grounds out.
	auto memo = std::make_shared<std::map<TPlusSymbol, Rational>>();
	auto self = std::make_shared<std::function<Rational(const TPlusSymbol&)>>();
	auto extension = std::make_shared<Character>(Character([self](const TPlusSymbol& gen) {
		return (*self)(gen);
	}));
	*self = [f, ctx, memo, extension](const TPlusSymbol& gen) -> Rational {
		auto it = memo->find(gen);
		if (it != memo->end()) return it->second;
		const TPlusSymbol unit = TPlusSymbol::one(gen.dim());
		Rational v(0);
		for (auto& [key, c] : ctx->delta_plus(gen).terms()) {
			if (key.first == unit && key.second == gen) continue;
			v += c * f(key.first) * (*extension)(key.second);
		}
		v = -v;
		memo->emplace(gen, v);
		return v;
	};
	return Character([self](const TPlusSymbol& gen) { return (*self)(gen); });
}

FormalSum<Rational> gamma_apply(const Character& f, const Symbol& tau, CoproductContext& ctx) {
	FormalSum<Rational> out;
	for (auto& [key, c] : ctx.delta(tau).terms()) out.add(key.first, c * f(key.second));
	return out;
}

} // namespace rs
