#pragma once
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rs/cumulants.hpp"
#include "rs/kernels.hpp"
#include "rs/rational.hpp"

namespace rs {

/// Kernel label on a graph edge: the compactly supported singular kernel K,
/// its mollification K_eps = K * rho_eps, or the full heat kernel P.
enum class EdgeKind { K, Keps, P };

/// Directed edge: the factor is Kernel(x_to - x_from). Orientation matters
/// because the kernels are not time-symmetric.
struct GraphEdge {
	int from = 0;
	int to = 0;
	EdgeKind kind = EdgeKind::K;
};

/// Hyperedge carrying the joint cumulant of the mollified noise over the
/// listed vertices; order must equal verts.size().
struct GraphCumulant {
	std::vector<int> verts;
	int order = 2;
};

/// A Feynman-style multiple integral: root vertices are pinned, every other
/// vertex is integrated over spacetime, edges contribute kernel factors and
/// cumulant hyperedges contribute noise-cumulant factors.
struct GraphSpec {
	int dimension = 3;
	int vertices = 0;
	std::vector<int> roots;
	std::vector<GraphEdge> edges;
	std::vector<GraphCumulant> cumulants;
	Rational symmetry{1};
};

/// JSON round trip for GraphSpec:
/// {"dimension":3, "vertices":4, "roots":[0],
///  "edges":[{"from":1,"to":0,"label":"K"}, ...],
///  "cumulants":[{"verts":[2,3],"order":2}], "symmetry":"2"}
GraphSpec parse_graph_spec(const std::string& json_text);
std::string render_graph_spec(const GraphSpec& g);

/// Monte-Carlo estimate with a standard error from batch means.
struct GraphEstimate {
	double value = 0.0;
	double std_error = 0.0;
	std::uint64_t samples = 0;
};

/// Importance-sampled Monte-Carlo evaluation of a graph integral at noise
/// scale eps.
///
/// Cumulant hyperedges are integrated in collapsed form: the p legs are tied
/// to a cluster centre w (a fresh integration variable) by mollifier offsets
/// drawn exactly from rho_eps, which cancels the cluster kernel and leaves
/// the scalar weight c_p * eps^{(d+2)(p/2-1)}; c_p is read off the attached
/// CumulantSpec as the cumulant of {0,..,p-1}. K_eps edges are unbiased
/// one-sample mollifications: K evaluated at an argument jittered by a
/// rho_eps draw.
///
/// Integration vertices are sampled along a breadth-first order from the
/// roots; each vertex draws from a mixture of parabolic power-law channels
/// matched to the kernel singularities of its already-placed neighbours.
/// The proposal confines every vertex to a parabolic ball of radius
/// proposal_radius() around an anchor, which is exact for K/K_eps graphs of
/// small diameter and a documented truncation for P edges.
class GraphIntegrator {
public:
	GraphIntegrator(GraphSpec spec, double eps);

	/// Scalar cumulant weights c_p; default is the all-ones table.
	void set_cumulant_weights(const CumulantSpec& weights);
	/// Pin root r at position pos (default: all roots at the origin).
	void set_root_position(int root, const Point& pos);
	/// Replace the kernel behind a label. A K override also feeds K_eps
	/// edges (still jittered); a Keps override disables the jitter and is
	/// used verbatim.
	void set_edge_kernel(EdgeKind kind, std::function<double(const Point&)> fn);
	/// Integrate |kernel| factors instead of signed ones.
	void set_absolute_kernels(bool flag);
	/// Extra proposal channel for a nested divergence: vertex v behaves
	/// like a singularity of parabolic exponent a anchored at vertex
	/// `anchor` once its subgraph is integrated out.
	void set_vertex_channel_hint(int v, int anchor, double exponent);
	/// Enlarge the confinement radius (needed for graphs of parabolic
	/// diameter beyond the default 2.5).
	void set_proposal_radius(double r);
	double proposal_radius() const { return radius_; }

	/// Run `samples` draws split into deterministic per-seed batches.
	/// Throws NonIntegrable when the weight distribution is so heavy-tailed
	/// that batch means are dominated by single draws (infinite-variance or
	/// divergent integrals).
	GraphEstimate run(std::uint64_t samples, std::uint64_t seed) const;

private:
	struct Hint {
		int v = 0;
		int anchor = 0;
		double exponent = 0.0;
	};

	GraphSpec spec_;
	double eps_;
	double radius_ = 2.5;
	bool absolute_ = false;
	std::vector<Point> root_pos_;          // parallel to spec_.roots
	std::vector<double> cum_weight_;       // per cumulant: c_p
	std::vector<Hint> hints_;
	KernelDecomposition kernel_;
	Mollifier rho_;
	std::function<double(const Point&)> override_K_, override_Keps_, override_P_;
};

/// One-call front end used by the CLI and the JSON interface.
GraphEstimate graph_integral(const GraphSpec& g, double eps,
                             std::uint64_t mc_samples, std::uint64_t seed);

/// Graph behind the leading mass renormalisation: second-cumulant cluster
/// with both legs K-connected to the root; equals int K_eps^2 for the
/// mollified white-noise pair cumulant. Diverges like eps^{-1} in d=3.
GraphSpec bubble_graph(int dimension = 3);

/// Third-cumulant cluster with three legs K-connected to the root; the
/// leading non-Gaussian constant, diverging like eps^{-3/2} in d=3.
GraphSpec third_cumulant_graph(int dimension = 3);

/// Two-loop sunset: two vertices K_eps-connected to both the root and an
/// intermediate vertex, plus a K edge between them. Log-divergent in d=3.
GraphSpec sunset_graph(int dimension = 3);

/// n parallel second-cumulant bubbles strung between the root and one
/// intermediate vertex (K edge back to the root). n=2 is the cumulant-form
/// sunset; n=3,4 appear in the order-eps correction constants.
GraphSpec multi_bubble_graph(int n_bubbles, int dimension = 3);

GraphEstimate constant_C1(double eps, std::uint64_t samples, std::uint64_t seed);
GraphEstimate constant_C2(double eps, const CumulantSpec& weights,
                          std::uint64_t samples, std::uint64_t seed);
GraphEstimate constant_C3(double eps, std::uint64_t samples, std::uint64_t seed);

/// Counterterm family for non-Gaussian noise: c2 ~ eps^{-3/2} feeds the
/// constant counterterm, c4 ~ eps^{-1/2} its subleading part, c3 carries the
/// log divergence of the linear counterterm, c5 stays bounded. Composite
/// constants sum their parts with standard errors combined in quadrature.
struct NonGaussianConstants {
	GraphEstimate c2, c3, c4, c5;
};
NonGaussianConstants constants_nonGaussian(double eps, const CumulantSpec& weights,
                                           std::uint64_t samples, std::uint64_t seed);

/// Constants of the eps-dependent quintic correction: c1 is the bubble,
/// c2 = 2 * double bubble (log-divergent), c3 = 3! eps c * triple bubble and
/// c4 = 4! eps^2 c^2 * quadruple bubble both tend to finite limits (the
/// coupling c enters linearly resp. quadratically).
struct ExtendedConstants {
	GraphEstimate c1, c2, c3, c4;
};
ExtendedConstants constants_extended(double eps, double c,
                                     std::uint64_t samples, std::uint64_t seed);

/// Least-squares slope of log|value| against log eps; point errors, when
/// given, propagate into the slope error.
struct SlopeFit {
	double slope = 0.0;
	double std_error = 0.0;
};
SlopeFit fit_log_slope(const std::vector<double>& eps,
                       const std::vector<double>& values,
                       const std::vector<double>& errors = {});

/// Scaling of the collapsed n-point cumulant integral in d=3: estimates
/// int prod_i |K(z_i - w_i)| |kappa_n^eps(w)| dw at fixed distinct pins z_i
/// across eps and fits the eps^{5(n/2-1)} prefactor.
struct CollapseFit {
	SlopeFit fit;
	double target = 0.0;
	std::vector<double> values;
};
CollapseFit collapse_scaling_check(int n, const std::vector<double>& eps_list,
                                   std::uint64_t samples, std::uint64_t seed);

}  // namespace rs
