#include "rs/graphs.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <queue>
#include <set>
#include <string>
#include <stdexcept>
#include <thread>

#include "json.hpp"

#include "rs/errors.hpp"
#include "rs/rng.hpp"

namespace rs {

namespace {

constexpr double kPi = 3.14159265358979323846;

double sphere_area(int d) {
	return d == 1 ? 2.0 : d == 2 ? 2.0 * kPi : 4.0 * kPi;
}

/// Fixed-size spacetime vector; unused spatial slots stay zero so the same
/// arithmetic covers d = 1, 2, 3.
struct Vec {
	double t = 0.0;
	double x0 = 0.0, x1 = 0.0, x2 = 0.0;
};

Vec operator+(const Vec& a, const Vec& b) {
	return {a.t + b.t, a.x0 + b.x0, a.x1 + b.x1, a.x2 + b.x2};
}

Vec operator-(const Vec& a, const Vec& b) {
	return {a.t - b.t, a.x0 - b.x0, a.x1 - b.x1, a.x2 - b.x2};
}

Vec operator*(double s, const Vec& a) { return {s * a.t, s * a.x0, s * a.x1, s * a.x2}; }

double parab(const Vec& v) {
	const double r2 = v.x0 * v.x0 + v.x1 * v.x1 + v.x2 * v.x2;
	return std::pow(v.t * v.t + r2 * r2, 0.25);
}

Vec from_point(const Point& p) {
	Vec v;
	v.t = p.t;
	if (p.x.size() > 0) v.x0 = p.x[0];
	if (p.x.size() > 1) v.x1 = p.x[1];
	if (p.x.size() > 2) v.x2 = p.x[2];
	return v;
}

/// int_lo^hi u^p du with the log branch at p = -1.
double power_mass(double lo, double hi, double p) {
	if (hi <= lo) return 0.0;
	if (std::abs(p + 1.0) < 1e-12) return std::log(hi / lo);
	const double lo_part = lo > 0.0 ? std::pow(lo, p + 1.0) : 0.0;
	return (std::pow(hi, p + 1.0) - lo_part) / (p + 1.0);
}

/// Inverse of v -> int_lo^x u^p du.
double power_inv(double lo, double p, double v) {
	if (std::abs(p + 1.0) < 1e-12) return lo * std::exp(v);
	const double lo_part = lo > 0.0 ? std::pow(lo, p + 1.0) : 0.0;
	return std::pow(std::max(lo_part + v * (p + 1.0), 0.0), 1.0 / (p + 1.0));
}

/// int_0^S max(s, c0)^{-a} s^{Ds-1} ds: mass of a power shell in parabolic
/// radius, used to weight proposal channels against each other.
double shell_mass(double a, double c0, double S, double Ds) {
	const double cut = std::min(c0, S);
	double m = cut > 0.0 ? std::pow(cut, Ds - a) / Ds : 0.0;
	if (S > cut) m += power_mass(cut, S, Ds - 1.0 - a);
	return m;
}

/// One proposal channel: |t| and r = |x| carry independent piecewise power
/// densities with plateaus below the core scale and range `span`, exponents
/// split so the joint density dominates (s + core)^{-a} in parabolic
/// distance s from the centre. core = 0 is allowed only for a < d (exact
/// kernel singularities); larger exponents need the plateau to stay proper.
struct Channel {
	Vec centre;
	int d = 3;
	int tside = 0;      // +-1 restricts to one time side (causal kernel poles)
	bool gauss = false;  // x | t Gaussian with variance 2t (heat profile)
	double gamma = 0.0, delta = 0.0;
	double tcore = 0.0, rcore = 0.0;
	double T = 0.0, R = 0.0;
	double t_in = 0.0, t_out = 0.0, r_in = 0.0, r_out = 0.0;

	Channel(const Vec& c, int dim, double a, double core, double span, int side = 0)
	    : centre(c), d(dim), tside(side) {
		const double ds = dim + 2.0;
		gamma = a / ds;
		delta = a * dim / ds;
		R = span;
		T = span * span;
		rcore = std::min(core, R);
		tcore = std::min(core * core, T);
		t_in = tcore > 0.0 ? std::pow(tcore, 1.0 - gamma) : 0.0;
		t_out = power_mass(tcore, T, -gamma);
		r_in = rcore > 0.0 ? std::pow(rcore, d - delta) / d : 0.0;
		r_out = power_mass(rcore, R, d - 1.0 - delta);
	}

	double density(const Vec& z) const {
		const Vec rel = z - centre;
		if (tside != 0 && rel.t * tside < 0.0) return 0.0;
		const double at = std::abs(rel.t);
		const double r2 = rel.x0 * rel.x0 + rel.x1 * rel.x1 + rel.x2 * rel.x2;
		if (at > T) return 0.0;
		const double tnorm = (tside != 0 ? 1.0 : 2.0) * (t_in + t_out);
		const double qt = std::pow(std::max(at, tcore), -gamma) / tnorm;
		if (gauss) {
			const double atf = std::max(at, 1e-60);
			return qt * std::exp(-0.25 * r2 / atf - 0.5 * d * std::log(4.0 * kPi * atf));
		}
		const double r = std::sqrt(r2);
		if (r > R) return 0.0;
		const double qx = std::pow(std::max(r, rcore), -delta) / ((r_in + r_out) * sphere_area(d));
		return qt * qx;
	}

	Vec sample(std::mt19937_64& rng) const {
		std::uniform_real_distribution<double> uni(0.0, 1.0);
		double m = uni(rng) * (t_in + t_out);
		double at = m < t_in ? m * std::pow(tcore, gamma) : power_inv(tcore, -gamma, m - t_in);
		at = std::min(at, T);
		const double t = tside != 0 ? tside * at : (uni(rng) < 0.5 ? -at : at);

		if (gauss) {
			std::normal_distribution<double> nd(0.0, std::sqrt(2.0 * std::max(at, 1e-60)));
			Vec out = centre;
			out.t += t;
			out.x0 += nd(rng);
			if (d > 1) out.x1 += nd(rng);
			if (d > 2) out.x2 += nd(rng);
			return out;
		}

		m = uni(rng) * (r_in + r_out);
		double r = m < r_in ? std::pow(d * m * std::pow(rcore, delta), 1.0 / d)
		                    : power_inv(rcore, d - 1.0 - delta, m - r_in);
		r = std::min(r, R);

		Vec out = centre;
		out.t += t;
		if (d == 1) {
			out.x0 += uni(rng) < 0.5 ? -r : r;
		} else if (d == 2) {
			const double th = 2.0 * kPi * uni(rng);
			out.x0 += r * std::cos(th);
			out.x1 += r * std::sin(th);
		} else {
			const double cth = 2.0 * uni(rng) - 1.0;
			const double phi = 2.0 * kPi * uni(rng);
			const double sth = std::sqrt(std::max(0.0, 1.0 - cth * cth));
			out.x0 += r * sth * std::cos(phi);
			out.x1 += r * sth * std::sin(phi);
			out.x2 += r * cth;
		}
		return out;
	}
};

struct EffEnd {
	int site = 0;   // integration site or root site
	int leg = -1;   // raw vertex id when the endpoint is a cluster leg
};

struct PlanEdge {
	EffEnd from, to;
	EdgeKind kind = EdgeKind::K;
	int jit = -1;   // jitter slot for K_eps edges
};

struct Constraint {
	int edge = 0;
	bool target_is_to = false;  // the sampled site sits at the edge's 'to' end
	int anchor_site = 0;
};

struct SitePlan {
	int site = 0;
	std::vector<Constraint> cons;
	std::vector<std::pair<int, double>> hints;      // (anchor_site, exponent)
	bool leaf = false;          // every incident edge ends at an earlier site
	std::vector<int> own_legs;  // raw leg ids used only by this site's edges
	std::vector<int> own_jits;  // jitter slots used only by this site's edges
};

struct HintT {
	int v = 0;
	int anchor = 0;
	double exponent = 0.0;
};

struct Plan {
	int d = 3;
	int n_raw = 0;
	int n_sites = 0;
	std::vector<PlanEdge> edges;
	int n_jit = 0;
	std::vector<int> leg_draw;                // raw ids of legs drawn once per sample
	std::vector<int> jit_draw;                // jitter slots drawn once per sample
	std::vector<char> deferred;               // edges folded into a leaf-site average
	std::vector<std::pair<int, Vec>> pinned;  // (site, position)
	std::vector<SitePlan> order;              // BFS sampling order
	double prefactor = 1.0;
	double eps = 0.0;
	double radius = 0.0;
	bool absolute = false;
};

Plan build_plan(const GraphSpec& g, double eps, double radius,
                const std::vector<Point>& root_pos, const std::vector<double>& cum_weight,
                const std::vector<HintT>& hints, bool absolute, bool keps_override) {
	if (g.dimension < 1 || g.dimension > 3)
		throw std::invalid_argument("graph dimension must be 1, 2 or 3");
	if (g.vertices < 1) throw std::invalid_argument("graph needs at least one vertex");
	if (!(eps > 0.0) || eps > 1.0) throw std::invalid_argument("eps must lie in (0,1]");
	if (g.roots.empty())
		throw NonIntegrable("graph without roots is translation invariant");

	const int V = g.vertices;
	std::vector<bool> is_root(V, false);
	for (int r : g.roots) {
		if (r < 0 || r >= V) throw std::invalid_argument("root index out of range");
		if (is_root[r]) throw std::invalid_argument("duplicate root");
		is_root[r] = true;
	}

	std::vector<int> cluster_of(V, -1);
	for (std::size_t c = 0; c < g.cumulants.size(); ++c) {
		const auto& cu = g.cumulants[c];
		if (cu.order != static_cast<int>(cu.verts.size()) || cu.order < 2)
			throw std::invalid_argument("cumulant order must match its vertex count and be >= 2");
		for (int v : cu.verts) {
			if (v < 0 || v >= V) throw std::invalid_argument("cumulant vertex out of range");
			if (is_root[v]) throw std::invalid_argument("cumulant leg cannot be a root");
			if (cluster_of[v] >= 0) throw std::invalid_argument("vertex in two cumulants");
			cluster_of[v] = static_cast<int>(c);
		}
	}

	Plan pl;
	pl.d = g.dimension;
	pl.n_raw = V;
	pl.n_sites = V + static_cast<int>(g.cumulants.size());
	pl.eps = eps;
	pl.radius = radius;
	pl.absolute = absolute;

	auto site_of = [&](int raw) {
		return cluster_of[raw] >= 0 ? V + cluster_of[raw] : raw;
	};

	for (const auto& e : g.edges) {
		if (e.from < 0 || e.from >= V || e.to < 0 || e.to >= V)
			throw std::invalid_argument("edge endpoint out of range");
		if (e.from == e.to) throw std::invalid_argument("self-loop on a single vertex");
		PlanEdge pe;
		pe.from = {site_of(e.from), cluster_of[e.from] >= 0 ? e.from : -1};
		pe.to = {site_of(e.to), cluster_of[e.to] >= 0 ? e.to : -1};
		pe.kind = e.kind;
		if (e.kind == EdgeKind::Keps && !keps_override) pe.jit = pl.n_jit++;
		pl.edges.push_back(pe);
	}

	for (const auto& cu : g.cumulants)
		for (int v : cu.verts) pl.leg_draw.push_back(v);

	for (std::size_t i = 0; i < g.roots.size(); ++i) {
		const Point& p = root_pos[i];
		if (static_cast<int>(p.x.size()) != g.dimension)
			throw std::invalid_argument("root position dimension mismatch");
		pl.pinned.emplace_back(g.roots[i], from_point(p));
	}

	// BFS from the roots over effective adjacency; discovery order is the
	// sampling order, so every sampled site has at least one placed anchor.
	std::vector<std::set<int>> adj(pl.n_sites);
	for (const auto& e : pl.edges) {
		if (e.from.site != e.to.site) {
			adj[e.from.site].insert(e.to.site);
			adj[e.to.site].insert(e.from.site);
		}
	}
	std::vector<int> placed_at(pl.n_sites, -1);
	std::queue<int> bfs;
	int step = 0;
	for (int r : g.roots)
		if (placed_at[r] < 0) {
			placed_at[r] = step++;
			bfs.push(r);
		}
	std::vector<int> sampled;
	while (!bfs.empty()) {
		const int u = bfs.front();
		bfs.pop();
		for (int v : adj[u])
			if (placed_at[v] < 0) {
				placed_at[v] = step++;
				sampled.push_back(v);
				bfs.push(v);
			}
	}
	for (int s = 0; s < pl.n_sites; ++s) {
		const bool is_site = s >= V || (!is_root[s] && cluster_of[s] < 0);
		if (is_site && placed_at[s] < 0)
			throw NonIntegrable("integration vertex not tied to any root");
	}

	for (int site : sampled) {
		SitePlan sp;
		sp.site = site;
		for (std::size_t ei = 0; ei < pl.edges.size(); ++ei) {
			const auto& e = pl.edges[ei];
			int other = -1;
			bool to_end = false;
			if (e.to.site == site && e.from.site != site) {
				other = e.from.site;
				to_end = true;
			} else if (e.from.site == site && e.to.site != site) {
				other = e.to.site;
			}
			if (other >= 0 && placed_at[other] < placed_at[site])
				sp.cons.push_back({static_cast<int>(ei), to_end, other});
		}
		if (sp.cons.size() > 31)
			throw std::invalid_argument("site degree too large for the proposal mixture");
		for (const auto& h : hints) {
			if (h.v < 0 || h.v >= V || cluster_of[h.v] >= 0)
				throw std::invalid_argument("channel hint must name a plain vertex");
			if (site_of(h.v) != site) continue;
			const int anchor = site_of(h.anchor);
			if (placed_at[anchor] < 0 || placed_at[anchor] >= placed_at[site])
				throw std::invalid_argument("hint anchor must be placed before the vertex");
			sp.hints.emplace_back(anchor, h.exponent);
		}
		pl.order.push_back(sp);
	}

	// A site whose incident edges all end at earlier sites is a leaf: its
	// edge factors and the offsets feeding them are local, so the sampler
	// can average the local factor over several inner draws per sample.
	// Without this, per-site relative variances multiply across sites and
	// graphs with many clusters get impractically noisy.
	pl.deferred.assign(pl.edges.size(), 0);
	for (auto& sp : pl.order) {
		std::size_t inc1 = 0, intra = 0;
		for (const auto& e : pl.edges) {
			const bool a = e.from.site == sp.site, b = e.to.site == sp.site;
			if (a && b)
				++intra;
			else if (a || b)
				++inc1;
		}
		if (intra > 0 || inc1 != sp.cons.size()) continue;
		sp.leaf = true;
		if (sp.site >= V) sp.own_legs = g.cumulants[sp.site - V].verts;
		for (const auto& c : sp.cons) {
			pl.deferred[c.edge] = 1;
			if (pl.edges[c.edge].jit >= 0) sp.own_jits.push_back(pl.edges[c.edge].jit);
		}
	}
	std::vector<char> owned_leg(V, 0), owned_jit(std::max(pl.n_jit, 1), 0);
	for (const auto& sp : pl.order) {
		for (int r : sp.own_legs) owned_leg[r] = 1;
		for (int j : sp.own_jits) owned_jit[j] = 1;
	}
	{
		std::vector<int> keep;
		for (int r : pl.leg_draw)
			if (!owned_leg[r]) keep.push_back(r);
		pl.leg_draw = std::move(keep);
		for (int j = 0; j < pl.n_jit; ++j)
			if (!owned_jit[j]) pl.jit_draw.push_back(j);
	}

	double pre = g.symmetry.to_double();
	for (std::size_t c = 0; c < g.cumulants.size(); ++c) {
		const double p = g.cumulants[c].order;
		pre *= cum_weight[c] * std::pow(eps, (g.dimension + 2.0) * (0.5 * p - 1.0));
	}
	pl.prefactor = pre;
	return pl;
}

/// Per-thread scratch buffers reused across samples.
struct Work {
	std::vector<Vec> pos;       // by site
	std::vector<Vec> off;       // by raw vertex (legs only are filled)
	std::vector<Vec> jit;       // by jitter slot
	std::vector<Channel> ch;
	std::vector<double> alpha;  // mixture weight per channel
	std::vector<Vec> targets;
	std::vector<int> tsign;     // required time side of (z - target) per edge
	Point scratch;
	std::uniform_real_distribution<double> uni{0.0, 1.0};
};

}  // namespace

GraphIntegrator::GraphIntegrator(GraphSpec spec, double eps)
    : spec_(std::move(spec)), eps_(eps),
      kernel_(spec_.dimension >= 1 && spec_.dimension <= 3 ? spec_.dimension : 3),
      rho_(spec_.dimension >= 1 && spec_.dimension <= 3 ? spec_.dimension : 3) {
	root_pos_.assign(spec_.roots.size(), Point{0.0, std::vector<double>(
	                                              std::max(1, spec_.dimension), 0.0)});
	cum_weight_.assign(spec_.cumulants.size(), 1.0);
	// Validate eagerly so malformed graphs fail at construction.
	build_plan(spec_, eps_, radius_, root_pos_, cum_weight_, {}, absolute_, false);
}

void GraphIntegrator::set_cumulant_weights(const CumulantSpec& weights) {
	cum_weight_.clear();
	for (const auto& cu : spec_.cumulants) {
		std::vector<int> idx(cu.order);
		std::iota(idx.begin(), idx.end(), 0);
		cum_weight_.push_back(weights.cumulant(idx).to_double());
	}
}

void GraphIntegrator::set_root_position(int root, const Point& pos) {
	auto it = std::find(spec_.roots.begin(), spec_.roots.end(), root);
	if (it == spec_.roots.end()) throw std::invalid_argument("not a root vertex");
	if (static_cast<int>(pos.x.size()) != spec_.dimension)
		throw std::invalid_argument("root position dimension mismatch");
	root_pos_[it - spec_.roots.begin()] = pos;
}

void GraphIntegrator::set_edge_kernel(EdgeKind kind, std::function<double(const Point&)> fn) {
	if (kind == EdgeKind::K)
		override_K_ = std::move(fn);
	else if (kind == EdgeKind::Keps)
		override_Keps_ = std::move(fn);
	else
		override_P_ = std::move(fn);
}

void GraphIntegrator::set_absolute_kernels(bool flag) { absolute_ = flag; }

void GraphIntegrator::set_vertex_channel_hint(int v, int anchor, double exponent) {
	if (!(exponent > 0.0)) throw std::invalid_argument("hint exponent must be positive");
	hints_.push_back({v, anchor, exponent});
}

void GraphIntegrator::set_proposal_radius(double r) {
	if (!(r > 0.0)) throw std::invalid_argument("proposal radius must be positive");
	radius_ = r;
}

GraphEstimate GraphIntegrator::run(std::uint64_t samples, std::uint64_t seed) const {
	if (samples == 0) throw std::invalid_argument("need at least one sample");
	std::vector<HintT> hints;
	for (const auto& h : hints_) hints.push_back({h.v, h.anchor, h.exponent});
	const Plan pl = build_plan(spec_, eps_, radius_, root_pos_, cum_weight_, hints,
	                           absolute_, static_cast<bool>(override_Keps_));

	const int d = pl.d;
	auto eval_K = [&](const Point& p) {
		return override_K_ ? override_K_(p) : kernel_.full(p);
	};
	auto eval_edge = [&](const PlanEdge& e, Work& w) {
		Vec arg = (w.pos[e.to.site] + (e.to.leg >= 0 ? w.off[e.to.leg] : Vec{})) -
		          (w.pos[e.from.site] + (e.from.leg >= 0 ? w.off[e.from.leg] : Vec{}));
		if (e.jit >= 0) arg = arg - w.jit[e.jit];
		w.scratch.t = arg.t;
		w.scratch.x[0] = arg.x0;
		if (d > 1) w.scratch.x[1] = arg.x1;
		if (d > 2) w.scratch.x[2] = arg.x2;
		switch (e.kind) {
			case EdgeKind::K:
				return eval_K(w.scratch);
			case EdgeKind::Keps:
				return override_Keps_ ? override_Keps_(w.scratch) : eval_K(w.scratch);
			default:
				return override_P_ ? override_P_(w.scratch) : heat_kernel(d, w.scratch);
		}
	};

	// The library kernels are causal at their singularity (zero for t < 0
	// near the origin), so pole channels can restrict to the correct time
	// side; the bounded acausal remainder stays covered by the two-sided
	// broad channel. Overridden kernels get two-sided channels.
	const bool causal_K = !override_K_;
	const bool causal_Keps = !override_K_ && !override_Keps_;
	const bool causal_P = !override_P_;

	// Samples a position for one site from its channel mixture, filling
	// w.pos[sp.site]; returns the mixture density at the sampled point.
	auto place_site = [&](const SitePlan& sp, Work& w, std::mt19937_64& rng) -> double {
		w.targets.clear();
		w.tsign.clear();
		for (const auto& c : sp.cons) {
			const auto& e = pl.edges[c.edge];
			const Vec jit = e.jit >= 0 ? w.jit[e.jit] : Vec{};
			Vec tgt;
			if (c.target_is_to) {
				tgt = w.pos[e.from.site] + (e.from.leg >= 0 ? w.off[e.from.leg] : Vec{}) +
				      jit - (e.to.leg >= 0 ? w.off[e.to.leg] : Vec{});
			} else {
				tgt = (w.pos[e.to.site] + (e.to.leg >= 0 ? w.off[e.to.leg] : Vec{})) -
				      jit - (e.from.leg >= 0 ? w.off[e.from.leg] : Vec{});
			}
			w.targets.push_back(tgt);
			const bool causal = e.kind == EdgeKind::K      ? causal_K
			                    : e.kind == EdgeKind::Keps ? causal_Keps
			                                               : causal_P;
			w.tsign.push_back(causal ? (c.target_is_to ? 1 : -1) : 0);
		}
		w.ch.clear();
		w.alpha.clear();
		const double lo_span = std::min(8.0 * pl.eps, pl.radius);
		const double sfloor = std::min(std::max(1e-3 * pl.eps, 1e-12), pl.radius);
		const double Ds = d + 2.0;
		const std::size_t nt = w.targets.size();
		// Per-target channels hug each kernel pole; spans shrink with the
		// distance to the nearest other pole so near-coincident targets
		// keep the proposal mass at the right scale. Each channel also
		// carries a power-counting estimate of the integrand mass it
		// covers (pole product times shell integral); picks are biased
		// towards the heavy channels so that collapsed configurations,
		// which dominate the integral, are proposed with fair frequency.
		for (std::size_t i = 0; i < nt; ++i) {
			double span = pl.radius;
			double v = 1.0;
			for (std::size_t j = 0; j < nt; ++j)
				if (j != i) {
					const double dist = parab(w.targets[i] - w.targets[j]);
					span = std::min(span, std::max(1.25 * dist, sfloor));
					v *= std::pow(std::max(dist, sfloor), -static_cast<double>(d));
				}
			w.ch.emplace_back(w.targets[i], d, static_cast<double>(d), 0.0, span,
			                  w.tsign[i]);
			// Causal kernels carry a heat-profile cross-section, so shape
			// the channel the same way instead of sampling x isotropically.
			w.ch.back().gauss = w.tsign[i] != 0;
			w.alpha.push_back(v * shell_mass(d, 0.0, span, Ds));
		}
		// Merged channels for every subset of targets: seen from outside
		// the subset cloud the poles compound to order d * |subset|, so
		// the core sits at the actual cloud radius.
		auto subset_channel = [&](unsigned mask) {
			Vec centre{};
			int k = 0;
			int side = 2;
			for (std::size_t j = 0; j < nt; ++j)
				if (mask & (1u << j)) {
					centre = centre + w.targets[j];
					side = side == 2 || side == w.tsign[j] ? w.tsign[j] : 0;
					++k;
				}
			centre = (1.0 / k) * centre;
			double r_cloud = 0.0;
			double dnext = pl.radius;
			double v = 1.0;
			bool full = true;
			for (std::size_t j = 0; j < nt; ++j) {
				const double dist = parab(w.targets[j] - centre);
				if (mask & (1u << j)) {
					r_cloud = std::max(r_cloud, dist);
				} else {
					dnext = std::min(dnext, dist);
					v *= std::pow(std::max(dist, sfloor), -static_cast<double>(d));
					full = false;
				}
			}
			const double core = std::max(r_cloud, sfloor);
			const double span =
			    full ? pl.radius : std::min(pl.radius, std::max(1.25 * dnext, core));
			w.ch.emplace_back(centre, d, static_cast<double>(d * k), core, span, side);
			w.alpha.push_back(v * shell_mass(d * k, core, span, Ds));
		};
		if (nt >= 2 && nt <= 6) {
			for (unsigned mask = 1; mask < (1u << nt); ++mask)
				if (__builtin_popcount(mask) >= 2) subset_channel(mask);
		} else if (nt > 6) {
			// High-degree sites: pairs plus the full cloud keep the
			// channel count quadratic.
			for (std::size_t i = 0; i < nt; ++i)
				for (std::size_t j = i + 1; j < nt; ++j)
					subset_channel((1u << i) | (1u << j));
			subset_channel((1u << nt) - 1);
		}
		for (const auto& h : sp.hints) {
			w.ch.emplace_back(w.pos[h.first], d, h.second, pl.eps, pl.radius);
			w.alpha.push_back(shell_mass(h.second, pl.eps, pl.radius, Ds));
			// Companion for the unmollified kernel spike below the core
			// scale, where the hinted marginal plateaus but K does not.
			w.ch.emplace_back(w.pos[h.first], d, static_cast<double>(d), 0.0, lo_span);
			w.alpha.push_back(std::pow(pl.eps, d - h.second) *
			                  shell_mass(d, 0.0, std::min(pl.eps, lo_span), Ds));
		}
		// Safety channels: a thin uniform cover of the whole proposal ball,
		// plus a denser cover of the unit ball where bounded kernel tails
		// (including the acausal remainder skipped by one-sided pole
		// channels) still carry real mass.
		const Vec anchor = w.pos[sp.cons.front().anchor_site];
		w.ch.emplace_back(anchor, d, 0.0, 0.0, pl.radius);
		w.alpha.push_back(0.0);
		w.ch.emplace_back(anchor, d, 0.0, 0.0, std::min(1.25, pl.radius));
		w.alpha.push_back(0.0);

		// 70% of picks follow the mass model, 22% spread uniformly so no
		// channel starves, 8% go to the safety nets.
		const std::size_t nc = w.ch.size();
		double msum = 0.0;
		bool msane = true;
		for (double m : w.alpha) {
			if (!(m >= 0.0) || !std::isfinite(m)) msane = false;
			msum += m;
		}
		if (!msane || !(msum > 0.0)) {
			for (double& a : w.alpha) a = 1.0 / static_cast<double>(nc);
		} else {
			for (double& a : w.alpha)
				a = 0.70 * (a / msum) + 0.22 / static_cast<double>(nc);
			w.alpha[nc - 1] += 0.04;
			w.alpha[nc - 2] += 0.04;
		}

		std::size_t pick = nc - 1;
		double acc = 0.0;
		const double r = w.uni(rng);
		for (std::size_t c = 0; c < nc; ++c) {
			acc += w.alpha[c];
			if (r < acc) {
				pick = c;
				break;
			}
		}
		const Vec z = w.ch[pick].sample(rng);
		double q = 0.0;
		for (std::size_t c = 0; c < nc; ++c) q += w.alpha[c] * w.ch[c].density(z);
		w.pos[sp.site] = z;
		return q;
	};

	// Inner draws per leaf site. Averaging the leaf's local factor inside
	// each sample keeps the per-site relative variances from multiplying
	// across sites, which would otherwise swamp many-cluster graphs. For a
	// single-site graph there is no product to tame, so the draws are
	// better spent on independent samples.
	const int kInner = pl.order.size() > 1 ? 16 : 1;
	auto one_sample = [&](Work& w, std::mt19937_64& rng) {
		for (int raw : pl.leg_draw) w.off[raw] = from_point(rho_.sample_scaled(pl.eps, rng));
		for (int j : pl.jit_draw) w.jit[j] = from_point(rho_.sample_scaled(pl.eps, rng));
		for (const auto& pin : pl.pinned) w.pos[pin.first] = pin.second;

		double weight = pl.prefactor;
		for (const auto& sp : pl.order) {
			if (!sp.leaf) {
				const double q = place_site(sp, w, rng);
				if (!(q > 0.0)) return 0.0;
				weight /= q;
				continue;
			}
			double acc = 0.0;
			for (int it = 0; it < kInner; ++it) {
				for (int raw : sp.own_legs)
					w.off[raw] = from_point(rho_.sample_scaled(pl.eps, rng));
				for (int j : sp.own_jits)
					w.jit[j] = from_point(rho_.sample_scaled(pl.eps, rng));
				const double q = place_site(sp, w, rng);
				if (!(q > 0.0)) continue;
				double fe = 1.0;
				for (const auto& c : sp.cons) {
					const double val = eval_edge(pl.edges[c.edge], w);
					fe *= pl.absolute ? std::abs(val) : val;
				}
				acc += fe / q;
			}
			weight *= acc / kInner;
			if (weight == 0.0) return 0.0;
		}
		double fprod = 1.0;
		for (std::size_t ei = 0; ei < pl.edges.size(); ++ei) {
			if (pl.deferred[ei]) continue;
			const double val = eval_edge(pl.edges[ei], w);
			fprod *= pl.absolute ? std::abs(val) : val;
			if (fprod == 0.0) return 0.0;
		}
		weight *= fprod;
		return weight;
	};

	const std::uint64_t B =
	    std::clamp<std::uint64_t>(samples / 2048, 4, 256);
	const std::uint64_t per = std::max<std::uint64_t>(1, samples / B);
	std::vector<double> means(B, 0.0);

	auto run_batch = [&](std::uint64_t b, Work& w) {
		std::mt19937_64 rng = seeded_stream(seed, b);
		double sum = 0.0;
		for (std::uint64_t i = 0; i < per; ++i) sum += one_sample(w, rng);
		means[b] = sum / static_cast<double>(per);
	};
	auto make_work = [&]() {
		Work w;
		w.pos.assign(pl.n_sites, Vec{});
		w.off.assign(pl.n_raw, Vec{});
		w.jit.assign(pl.n_jit, Vec{});
		w.scratch.t = 0.0;
		w.scratch.x.assign(d, 0.0);
		return w;
	};

	int threads = 1;
	if (const char* env = std::getenv("RS_THREADS")) threads = std::atoi(env);
	threads = std::clamp<int>(threads, 1, 32);
	threads = std::min<int>(threads, static_cast<int>(B));
	if (threads <= 1) {
		Work w = make_work();
		for (std::uint64_t b = 0; b < B; ++b) run_batch(b, w);
	} else {
		std::vector<std::thread> pool;
		for (int t = 0; t < threads; ++t)
			pool.emplace_back([&, t]() {
				Work w = make_work();
				for (std::uint64_t b = t; b < B; b += threads) run_batch(b, w);
			});
		for (auto& th : pool) th.join();
	}

	RunningStats stats;
	double amax = 0.0, asum = 0.0;
	for (double m : means) {
		if (!std::isfinite(m))
			throw NonIntegrable("non-finite batch mean in graph integral");
		stats.push(m);
		asum += std::abs(m);
		amax = std::max(amax, std::abs(m));
	}
	if (B >= 16 && asum > 0.0 && amax / asum > 0.3)
		throw NonIntegrable("batch means dominated by single draws; "
		                    "integrand looks divergent or has infinite variance");
	GraphEstimate est;
	est.value = stats.mean();
	est.std_error = stats.stderr_of_mean();
	est.samples = B * per;
	return est;
}

GraphEstimate graph_integral(const GraphSpec& g, double eps, std::uint64_t mc_samples,
                             std::uint64_t seed) {
	return GraphIntegrator(g, eps).run(mc_samples, seed);
}

GraphSpec parse_graph_spec(const std::string& json_text) {
	nlohmann::json j;
	try {
		j = nlohmann::json::parse(json_text);
	} catch (const nlohmann::json::exception& e) {
		throw std::invalid_argument(std::string("bad graph JSON: ") + e.what());
	}
	try {
		GraphSpec g;
		g.dimension = j.value("dimension", 3);
		g.vertices = j.at("vertices").get<int>();
		g.roots = j.at("roots").get<std::vector<int>>();
		for (const auto& e : j.value("edges", nlohmann::json::array())) {
			GraphEdge ge;
			ge.from = e.at("from").get<int>();
			ge.to = e.at("to").get<int>();
			const std::string label = e.at("label").get<std::string>();
			if (label == "K")
				ge.kind = EdgeKind::K;
			else if (label == "Keps" || label == "K_eps")
				ge.kind = EdgeKind::Keps;
			else if (label == "P")
				ge.kind = EdgeKind::P;
			else
				throw std::invalid_argument("unknown edge label: " + label);
			g.edges.push_back(ge);
		}
		for (const auto& c : j.value("cumulants", nlohmann::json::array())) {
			GraphCumulant gc;
			gc.verts = c.at("verts").get<std::vector<int>>();
			gc.order = c.value("order", static_cast<int>(gc.verts.size()));
			g.cumulants.push_back(gc);
		}
		if (j.contains("symmetry")) {
			const auto& s = j["symmetry"];
			g.symmetry = s.is_string() ? Rational::parse(s.get<std::string>())
			                           : Rational(s.get<std::int64_t>());
		}
		return g;
	} catch (const nlohmann::json::exception& e) {
		throw std::invalid_argument(std::string("bad graph JSON: ") + e.what());
	}
}

std::string render_graph_spec(const GraphSpec& g) {
	nlohmann::json j;
	j["dimension"] = g.dimension;
	j["vertices"] = g.vertices;
	j["roots"] = g.roots;
	j["edges"] = nlohmann::json::array();
	for (const auto& e : g.edges) {
		const char* label = e.kind == EdgeKind::K ? "K" : e.kind == EdgeKind::Keps ? "Keps" : "P";
		j["edges"].push_back({{"from", e.from}, {"to", e.to}, {"label", label}});
	}
	j["cumulants"] = nlohmann::json::array();
	for (const auto& c : g.cumulants)
		j["cumulants"].push_back({{"verts", c.verts}, {"order", c.order}});
	j["symmetry"] = g.symmetry.str();
	return j.dump(2);
}

GraphSpec bubble_graph(int dimension) {
	GraphSpec g;
	g.dimension = dimension;
	g.vertices = 3;
	g.roots = {0};
	g.edges = {{1, 0, EdgeKind::K}, {2, 0, EdgeKind::K}};
	g.cumulants = {{{1, 2}, 2}};
	return g;
}

GraphSpec third_cumulant_graph(int dimension) {
	GraphSpec g;
	g.dimension = dimension;
	g.vertices = 4;
	g.roots = {0};
	g.edges = {{1, 0, EdgeKind::K}, {2, 0, EdgeKind::K}, {3, 0, EdgeKind::K}};
	g.cumulants = {{{1, 2, 3}, 3}};
	return g;
}

GraphSpec sunset_graph(int dimension) {
	GraphSpec g;
	g.dimension = dimension;
	g.vertices = 4;
	g.roots = {0};
	g.edges = {{2, 0, EdgeKind::Keps}, {2, 1, EdgeKind::Keps},
	           {3, 0, EdgeKind::Keps}, {3, 1, EdgeKind::Keps},
	           {1, 0, EdgeKind::K}};
	return g;
}

GraphSpec multi_bubble_graph(int n_bubbles, int dimension) {
	if (n_bubbles < 1) throw std::invalid_argument("need at least one bubble");
	GraphSpec g;
	g.dimension = dimension;
	g.vertices = 2 + 2 * n_bubbles;
	g.roots = {0};
	g.edges = {{1, 0, EdgeKind::K}};
	for (int k = 0; k < n_bubbles; ++k) {
		const int south = 2 + 2 * k, north = 3 + 2 * k;
		g.edges.push_back({south, 0, EdgeKind::K});
		g.edges.push_back({north, 1, EdgeKind::K});
		g.cumulants.push_back({{south, north}, 2});
	}
	return g;
}

namespace {

GraphEstimate scaled(GraphEstimate e, double s) {
	e.value *= s;
	e.std_error *= std::abs(s);
	return e;
}

GraphEstimate sum_parts(const GraphEstimate& a, const GraphEstimate& b) {
	GraphEstimate e;
	e.value = a.value + b.value;
	e.std_error = std::hypot(a.std_error, b.std_error);
	e.samples = a.samples + b.samples;
	return e;
}

std::uint64_t subseed(std::uint64_t seed, std::uint64_t salt) {
	std::uint64_t s = seed ^ (0xA24BAED4963EE407ull * (salt + 1));
	return splitmix64(s);
}

}  // namespace

GraphEstimate constant_C1(double eps, std::uint64_t samples, std::uint64_t seed) {
	return GraphIntegrator(bubble_graph(3), eps).run(samples, seed);
}

GraphEstimate constant_C2(double eps, const CumulantSpec& weights, std::uint64_t samples,
                          std::uint64_t seed) {
	GraphIntegrator gi(third_cumulant_graph(3), eps);
	gi.set_cumulant_weights(weights);
	return gi.run(samples, seed);
}

GraphEstimate constant_C3(double eps, std::uint64_t samples, std::uint64_t seed) {
	GraphSpec g = sunset_graph(3);
	g.symmetry = Rational(2);
	GraphIntegrator gi(g, eps);
	gi.set_vertex_channel_hint(1, 0, 5.0);
	return gi.run(samples, seed);
}

NonGaussianConstants constants_nonGaussian(double eps, const CumulantSpec& weights,
                                           std::uint64_t samples, std::uint64_t seed) {
	NonGaussianConstants out;
	out.c2 = constant_C2(eps, weights, samples, subseed(seed, 2));

	{
		GraphSpec g = multi_bubble_graph(2);
		g.symmetry = Rational(2);
		GraphIntegrator gi(g, eps);
		gi.set_cumulant_weights(weights);
		gi.set_vertex_channel_hint(1, 0, 5.0);
		const GraphEstimate sunset = gi.run(samples, subseed(seed, 31));

		GraphSpec q;  // fourth cumulant, two legs to each end of the K edge
		q.dimension = 3;
		q.vertices = 6;
		q.roots = {0};
		q.edges = {{1, 0, EdgeKind::K}, {2, 0, EdgeKind::K}, {3, 0, EdgeKind::K},
		           {4, 1, EdgeKind::K}, {5, 1, EdgeKind::K}};
		q.cumulants = {{{2, 3, 4, 5}, 4}};
		GraphIntegrator gq(q, eps);
		gq.set_cumulant_weights(weights);
		gq.set_vertex_channel_hint(1, 0, 9.0);
		out.c3 = sum_parts(sunset, gq.run(samples, subseed(seed, 32)));
	}
	{
		GraphSpec g;  // fifth cumulant: two legs at the root, three at the middle
		g.dimension = 3;
		g.vertices = 7;
		g.roots = {0};
		g.edges = {{1, 0, EdgeKind::K}, {2, 0, EdgeKind::K}, {3, 0, EdgeKind::K},
		           {4, 1, EdgeKind::K}, {5, 1, EdgeKind::K}, {6, 1, EdgeKind::K}};
		g.cumulants = {{{2, 3, 4, 5, 6}, 5}};
		GraphIntegrator gi(g, eps);
		gi.set_cumulant_weights(weights);
		gi.set_vertex_channel_hint(1, 0, 9.0);
		const GraphEstimate quint = gi.run(samples, subseed(seed, 41));

		GraphSpec m;  // pair bubble times third-cumulant cluster, 6 pairings
		m.dimension = 3;
		m.vertices = 7;
		m.roots = {0};
		m.edges = {{1, 0, EdgeKind::K}, {2, 0, EdgeKind::K}, {3, 1, EdgeKind::K},
		           {4, 0, EdgeKind::K}, {5, 1, EdgeKind::K}, {6, 1, EdgeKind::K}};
		m.cumulants = {{{2, 3}, 2}, {{4, 5, 6}, 3}};
		m.symmetry = Rational(6);
		GraphIntegrator gm(m, eps);
		gm.set_cumulant_weights(weights);
		gm.set_vertex_channel_hint(1, 0, 7.0);
		out.c4 = sum_parts(quint, gm.run(samples, subseed(seed, 42)));
	}
	{
		GraphSpec g;  // fourth cumulant: one leg at the root, three at the middle
		g.dimension = 3;
		g.vertices = 6;
		g.roots = {0};
		g.edges = {{1, 0, EdgeKind::K}, {2, 0, EdgeKind::K}, {3, 1, EdgeKind::K},
		           {4, 1, EdgeKind::K}, {5, 1, EdgeKind::K}};
		g.cumulants = {{{2, 3, 4, 5}, 4}};
		GraphIntegrator gi(g, eps);
		gi.set_cumulant_weights(weights);
		gi.set_vertex_channel_hint(1, 0, 6.0);
		out.c5 = gi.run(samples, subseed(seed, 51));
	}
	return out;
}

ExtendedConstants constants_extended(double eps, double c, std::uint64_t samples,
                                     std::uint64_t seed) {
	ExtendedConstants out;
	out.c1 = constant_C1(eps, samples, subseed(seed, 1));
	{
		GraphSpec g = multi_bubble_graph(2);
		g.symmetry = Rational(2);
		GraphIntegrator gi(g, eps);
		gi.set_vertex_channel_hint(1, 0, 5.0);
		out.c2 = gi.run(samples, subseed(seed, 2));
	}
	{
		GraphIntegrator gi(multi_bubble_graph(3), eps);
		gi.set_vertex_channel_hint(1, 0, 6.0);
		out.c3 = scaled(gi.run(samples, subseed(seed, 3)), 6.0 * eps * c);
	}
	{
		GraphIntegrator gi(multi_bubble_graph(4), eps);
		gi.set_vertex_channel_hint(1, 0, 7.0);
		out.c4 = scaled(gi.run(samples, subseed(seed, 4)), 24.0 * eps * eps * c * c);
	}
	return out;
}

SlopeFit fit_log_slope(const std::vector<double>& eps, const std::vector<double>& values,
                       const std::vector<double>& errors) {
	const std::size_t n = eps.size();
	if (n < 2 || values.size() != n || (!errors.empty() && errors.size() != n))
		throw std::invalid_argument("fit_log_slope needs matching lists of >= 2 points");
	std::vector<double> xs(n), ys(n);
	for (std::size_t i = 0; i < n; ++i) {
		if (!(eps[i] > 0.0) || values[i] == 0.0 || !std::isfinite(values[i]))
			throw std::invalid_argument("fit_log_slope needs positive eps and nonzero values");
		xs[i] = std::log(eps[i]);
		ys[i] = std::log(std::abs(values[i]));
	}
	const double xbar = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
	const double ybar = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
	double sxx = 0.0, sxy = 0.0;
	for (std::size_t i = 0; i < n; ++i) {
		sxx += (xs[i] - xbar) * (xs[i] - xbar);
		sxy += (xs[i] - xbar) * (ys[i] - ybar);
	}
	if (!(sxx > 0.0)) throw std::invalid_argument("fit_log_slope needs distinct eps values");
	SlopeFit fit;
	fit.slope = sxy / sxx;
	if (!errors.empty()) {
		double var = 0.0;
		for (std::size_t i = 0; i < n; ++i) {
			const double ci = (xs[i] - xbar) / sxx;
			const double sy = errors[i] / std::abs(values[i]);
			var += ci * ci * sy * sy;
		}
		fit.std_error = std::sqrt(var);
	} else if (n > 2) {
		double ss = 0.0;
		for (std::size_t i = 0; i < n; ++i) {
			const double r = ys[i] - ybar - fit.slope * (xs[i] - xbar);
			ss += r * r;
		}
		fit.std_error = std::sqrt(ss / (n - 2) / sxx);
	}
	return fit;
}

CollapseFit collapse_scaling_check(int n, const std::vector<double>& eps_list,
                                   std::uint64_t samples, std::uint64_t seed) {
	if (n < 2 || n > 4) throw std::invalid_argument("collapse check covers n in {2,3,4}");
	if (eps_list.size() < 2)
		throw std::invalid_argument("collapse check needs at least two eps values");
	const std::vector<Point> pins = {
	    {0.00, {0.0, 0.0, 0.0}},
	    {0.05, {0.4, 0.0, 0.0}},
	    {-0.04, {0.0, 0.45, 0.0}},
	    {0.06, {0.15, 0.2, -0.35}},
	};
	GraphSpec g;
	g.dimension = 3;
	g.vertices = 2 * n;
	for (int i = 0; i < n; ++i) {
		g.roots.push_back(i);
		g.edges.push_back({n + i, i, EdgeKind::K});
	}
	GraphCumulant cu;
	for (int i = 0; i < n; ++i) cu.verts.push_back(n + i);
	cu.order = n;
	g.cumulants = {cu};

	CollapseFit out;
	out.target = 5.0 * (0.5 * n - 1.0);
	std::vector<double> errs;
	for (std::size_t i = 0; i < eps_list.size(); ++i) {
		GraphIntegrator gi(g, eps_list[i]);
		for (int r = 0; r < n; ++r) gi.set_root_position(r, pins[r]);
		gi.set_absolute_kernels(true);
		const GraphEstimate est = gi.run(samples, subseed(seed, 100 + i));
		out.values.push_back(est.value);
		errs.push_back(est.std_error);
	}
	out.fit = fit_log_slope(eps_list, out.values, errs);
	return out;
}

}  // namespace rs
