#pragma once

#include <gmpxx.h>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <map>
#include <new>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "selfsim/algebra/mahler.hpp"
#include "selfsim/cli/config.hpp"
#include "selfsim/cli/report.hpp"
#include "selfsim/entropy/garsia.hpp"
#include "selfsim/entropy/lb_phi.hpp"
#include "selfsim/entropy/smoothed.hpp"
#include "selfsim/errors.hpp"
#include "selfsim/ifs/levels.hpp"
#include "selfsim/ifs/separation.hpp"

namespace selfsim::cli {

/// Rough heap footprint of one stored half-sum or atom.
inline constexpr std::uint64_t kBytesPerEntry = 128;

/// Command parameters. Reads are recorded so that defaults appear in the
/// echoed config and unknown keys can be rejected.
class Params {
 public:
  explicit Params(const json& in) : in_(in.is_null() ? json::object() : in) {}

  const json* raw(const std::string& key) {
    used_.insert(key);
    if (!in_.contains(key)) return nullptr;
    out_[key] = in_[key];
    return &in_[key];
  }

  long integer(const std::string& key, long def, long lo, long hi) {
    const json* v = raw(key);
    if (!v) {
      out_[key] = def;
      return def;
    }
    mpz_class z = integer_at(*v, ptr(key));
    if (z < lo || z > hi)
      throw ValidationError(key + " must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]", ptr(key));
    return z.get_si();
  }

  mpq_class rational(const std::string& key, const std::optional<std::string>& def = std::nullopt) {
    const json* v = raw(key);
    if (!v) {
      if (!def) throw ValidationError(key + " is required", ptr(key));
      out_[key] = *def;
      return parse_rational(*def);
    }
    return rational_at(*v, ptr(key));
  }

  double real(const std::string& key, const std::optional<std::string>& def = std::nullopt) {
    return rational(key, def).get_d();
  }

  std::string choice(const std::string& key, const std::string& def, const std::vector<std::string>& allowed) {
    const json* v = raw(key);
    if (!v) {
      out_[key] = def;
      return def;
    }
    if (!v->is_string() || std::find(allowed.begin(), allowed.end(), v->get<std::string>()) == allowed.end()) {
      std::string list;
      for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
      throw ValidationError(key + " must be one of: " + list, ptr(key));
    }
    return v->get<std::string>();
  }

  std::vector<double> positive_list(const std::string& key) {
    const json* v = raw(key);
    std::vector<double> out;
    if (!v) return out;
    if (!v->is_array() || v->empty()) throw ValidationError(key + " must be a nonempty array", ptr(key));
    for (std::size_t i = 0; i < v->size(); ++i) {
      mpq_class q = rational_at((*v)[i], ptr(key) + "/" + std::to_string(i));
      if (q <= 0) throw ValidationError("values must be positive", ptr(key) + "/" + std::to_string(i));
      out.push_back(q.get_d());
    }
    return out;
  }

  void finish() const {
    for (auto it = in_.begin(); it != in_.end(); ++it)
      if (!used_.count(it.key())) throw ValidationError("unknown parameter '" + it.key() + "'", ptr(it.key()));
  }

  const json& resolved() const { return out_; }
  static std::string ptr(const std::string& key) { return "/params/" + key; }

 private:
  json in_;
  json out_ = json::object();
  std::set<std::string> used_;
};

namespace detail {

inline ifs::SearchOptions search_options(const RunConfig& c) {
  ifs::SearchOptions o;
  if (c.memory_cap) o.memory_cap = std::max<std::uint64_t>(*c.memory_cap / kBytesPerEntry, 1);
  return o;
}

inline ifs::CollapseOptions collapse_options(const ifs::IFSSpec& s, const RunConfig& c) {
  ifs::CollapseOptions o = ifs::default_collapse(s);
  if (c.memory_cap) o.max_atoms = std::max<std::uint64_t>(*c.memory_cap / kBytesPerEntry, 1);
  return o;
}

/// Exact decimal when the denominator has only the factors 2 and 5, else "a/b".
inline std::string decimal_text(const mpq_class& q) {
  mpz_class den = q.get_den(), rest = den;
  unsigned long k = 0;
  for (unsigned long f : {2ul, 5ul})
    while (mpz_divisible_ui_p(rest.get_mpz_t(), f)) {
      mpz_divexact_ui(rest.get_mpz_t(), rest.get_mpz_t(), f);
      ++k;
    }
  if (rest != 1 || den == 1) return q.get_str();
  mpz_class p10;
  mpz_ui_pow_ui(p10.get_mpz_t(), 10, k);
  mpz_class digits = abs(q.get_num()) * (p10 / den);
  std::string s = digits.get_str();
  if (s.size() <= k) s.insert(0, k + 1 - s.size(), '0');
  s.insert(s.size() - k, ".");
  while (s.back() == '0') s.pop_back();
  return (q < 0 ? "-" : "") + s;
}

inline std::string mode_name(bool certified) { return certified ? "certified" : "numeric"; }

inline json word_json(const std::vector<int>& w) { return json(w); }

inline std::string verdict_name(algebra::Verdict v) { return algebra::to_string(v); }

inline entropy::SmoothingOptions smoothing(Params& p, const RunConfig& c) {
  entropy::SmoothingOptions o;
  std::string m = p.choice("method", "quadrature", {"quadrature", "montecarlo"});
  o.method = m == "quadrature" ? entropy::Method::Quadrature : entropy::Method::MonteCarlo;
  o.samples = static_cast<std::size_t>(p.integer("samples", 200000, 100, 1L << 32));
  o.seed = c.seed;
  return o;
}

inline std::string smoothing_method(const entropy::SmoothingOptions& o) {
  return o.method == entropy::Method::Quadrature ? "Gauss-Kronrod quadrature of the smoothed density"
                                                 : "Monte Carlo, " + std::to_string(o.samples) + " samples";
}

/// nu = sum_j p_j delta(t_j) on the distinguished embedding.
inline entropy::AtomicDistribution translation_measure(const ifs::IFSSpec& s) {
  entropy::AtomicDistribution d;
  for (std::size_t j = 0; j < s.m(); ++j) d.positions.emplace_back(s.translation_value(j, 96));
  d.weights = s.probs();
  return d;
}

inline const algebra::AlgebraicNumber& exact_lambda(const ifs::IFSSpec& s) {
  if (!s.certified()) throw ValidationError("this command needs an exact lambda", "/ifs/lambda");
  return s.lambda().algebraic();
}

}  // namespace detail

struct Context {
  const RunConfig& cfg;
  Params& params;
  std::optional<ifs::IFSSpec> ifs;

  const ifs::IFSSpec& spec() const {
    if (!ifs) throw ValidationError("ifs is required for this command", "/ifs");
    return *ifs;
  }
  PrecisionContext precision() const { return cfg.context(); }
};

inline Report cmd_mahler(Context& cx, bool height) {
  Report r;
  const auto ctx = cx.precision();
  r.precision_bits = ctx.working_bits;
  if (const json* pv = cx.params.raw("poly")) {
    auto f = polynomial_at(*pv, "/params/poly");
    if (f.degree() < 1) throw ValidationError("poly must have degree at least 1", "/params/poly");
    auto nb = algebra::check_norm_bounds(f, ctx);
    numerics::Ball v = nb.mahler;
    if (height) v = numerics::root(v, static_cast<unsigned long>(f.degree()), ctx.working_bits);
    r.quantity = height ? "height" : "mahler_measure";
    r.value = centre(v);
    r.error = radius_up(v);
    r.details = {{"poly", f.to_string()},
                 {"degree", f.degree()},
                 {"mahler", ball_json(nb.mahler)},
                 {"norm_bounds",
                  {{"mahler_le_l1", detail::verdict_name(nb.mahler_le_l1)},
                   {"linf_over_binom_le_mahler", detail::verdict_name(nb.linf_over_binom_le_mahler)},
                   {"mahler_le_l2", detail::verdict_name(nb.mahler_le_l2)},
                   {"l2_le_sqrt_n1_linf", detail::verdict_name(nb.l2_le_sqrt_n1_linf)},
                   {"l1_le_2n_mahler", detail::verdict_name(nb.l1_le_2n_mahler)}}}};
    r.provenance = {"mahler_measure", "check_norm_bounds"};
    if (height) r.provenance.push_back("height");
  } else {
    const auto& alpha = detail::exact_lambda(cx.spec());
    auto id = algebra::mtilde_identity(alpha, ctx);
    numerics::Ball v = height ? algebra::height(alpha, ctx) : id.mahler;
    r.quantity = height ? "height" : "mahler_measure";
    r.value = centre(v);
    r.error = radius_up(v);
    r.details = {{"minpoly", alpha.minpoly().to_string()},
                 {"degree", alpha.degree()},
                 {"mahler", ball_json(id.mahler)},
                 {"mtilde", ball_json(id.mtilde)},
                 {"constant_coeff", id.constant_coeff.get_str()},
                 {"vieta_identity_holds", id.holds}};
    r.provenance = {"mahler_measure", "mtilde"};
    if (height) r.provenance.push_back("height");
  }
  r.method = "certified root isolation";
  return r;
}

inline Report cmd_overlap(Context& cx) {
  const auto& s = cx.spec();
  int n_max = static_cast<int>(cx.params.integer("n_max", 20, 1, 62));
  auto co = detail::collapse_options(s, cx.cfg);
  auto w = ifs::detect_exact_overlaps(s, n_max, co.max_atoms);
  Report r;
  r.quantity = "exact_overlap_level";
  r.method = "certified level collapse with exact zero tests";
  r.provenance = {"detect_exact_overlaps"};
  r.precision_bits = cx.cfg.precision;
  r.details["n_max"] = n_max;
  r.details["found"] = w.has_value();
  r.table.header = {"n", "word1", "word2", "translation", "translation_radius"};
  if (w) {
    r.value = w->n;
    auto m1 = ifs::compose_word(s, w->word1), m2 = ifs::compose_word(s, w->word2);
    r.details["word1"] = detail::word_json(w->word1);
    r.details["word2"] = detail::word_json(w->word2);
    r.details["translation1"] = ball_json(m1.translation);
    r.details["translation2"] = ball_json(m2.translation);
    r.table.rows.push_back({std::to_string(w->n), ifs::word_to_string(w->word1), ifs::word_to_string(w->word2),
                            shortest(centre(m1.translation)), shortest(radius_up(m1.translation))});
  } else {
    r.value = nullptr;
  }
  return r;
}

inline Report delta_report(const ifs::IFSSpec& s, const ifs::DeltaResult& d) {
  Report r;
  r.quantity = "delta_n";
  auto ds = ifs::difference_set(s);
  r.value = d.has_nonzero ? json(centre(d.delta)) : json(nullptr);
  r.error = d.has_nonzero ? radius_up(d.delta) : 0;
  r.method = d.certified ? "meet-in-the-middle, certified zero separation" : "meet-in-the-middle, numeric tolerance";
  r.provenance = {"delta_n"};
  r.precision_bits = d.precision_bits;
  json zw = json::array();
  for (const auto& p : d.zero_witnesses) zw.push_back(p.to_string(ds));
  r.details = {{"n", d.n},
               {"has_nonzero", d.has_nonzero},
               {"overlap", d.overlap},
               {"zero_witnesses", zw},
               {"minimizer", d.has_nonzero ? json(d.minimizer.to_string(ds)) : json(nullptr)},
               {"low_classes", d.low_classes},
               {"high_classes", d.high_classes},
               {"certified", d.certified}};
  r.table.header = {"n", "delta", "radius", "overlap"};
  r.table.rows.push_back({std::to_string(d.n), d.has_nonzero ? shortest(centre(d.delta)) : "",
                          d.has_nonzero ? shortest(radius_up(d.delta)) : "", d.overlap ? "true" : "false"});
  return r;
}

inline Report cmd_deltan(Context& cx) {
  int n = static_cast<int>(cx.params.integer("n", 8, 1, 62));
  return delta_report(cx.spec(), ifs::delta_n(cx.spec(), n, detail::search_options(cx.cfg)));
}

inline Report cmd_sep_probe(Context& cx) {
  double c = cx.params.real("c");
  int N = static_cast<int>(cx.params.integer("N", 10, 1, 62));
  auto entries = ifs::exp_separation_probe(cx.spec(), c, N, detail::search_options(cx.cfg));
  Report r;
  r.quantity = "exp_separation_levels";
  r.method = "certified comparison of delta_n with c^n";
  r.provenance = {"exp_separation_probe", "delta_n"};
  json holds = json::array(), rows = json::array();
  r.table.header = {"n", "delta", "radius", "bound", "verdict"};
  for (const auto& e : entries) {
    r.precision_bits = std::max(r.precision_bits, e.delta.precision_bits);
    if (e.verdict == algebra::Verdict::Holds) holds.push_back(e.n);
    rows.push_back({{"n", e.n},
                    {"delta", e.delta.has_nonzero ? ball_json(e.delta.delta) : json(nullptr)},
                    {"bound", ball_json(e.bound)},
                    {"overlap", e.delta.overlap},
                    {"verdict", detail::verdict_name(e.verdict)}});
    r.table.rows.push_back({std::to_string(e.n), e.delta.has_nonzero ? shortest(centre(e.delta.delta)) : "",
                            e.delta.has_nonzero ? shortest(radius_up(e.delta.delta)) : "", shortest(centre(e.bound)),
                            detail::verdict_name(e.verdict)});
  }
  r.value = holds;
  r.details = {{"c", c}, {"N", N}, {"rows", rows}};
  return r;
}

inline Report cmd_near_overlap(Context& cx) {
  const auto& s = cx.spec();
  int n = static_cast<int>(cx.params.integer("n", 8, 0, 62));
  mpq_class rq = cx.params.rational("r");
  if (rq < 0) throw ValidationError("r must be nonnegative", "/params/r");
  // Round up.
  numerics::Dyadic r = numerics::from_rational(rq, 96, numerics::Round::Ceil);
  auto ds = ifs::difference_set(s);
  auto res = ifs::near_overlap_search(s.lambda(), ds, n, r, detail::search_options(cx.cfg), cx.precision());
  Report out;
  out.quantity = "near_overlap_count";
  out.value = res.hits.size();
  out.method = res.certified ? "meet-in-the-middle with certified re-evaluation" : "meet-in-the-middle on a fixed enclosure";
  out.provenance = {"near_overlap_search"};
  out.precision_bits = res.precision_bits;
  json hits = json::array(), unc = json::array();
  out.table.header = {"poly", "value", "radius", "exact_zero"};
  for (const auto& h : res.hits) {
    hits.push_back({{"poly", h.poly.to_string(ds)}, {"value", ball_json(h.value)}, {"exact_zero", h.exact_zero}});
    out.table.rows.push_back({h.poly.to_string(ds), h.exact_zero ? "0" : shortest(centre(h.value)),
                              h.exact_zero ? "0" : shortest(radius_up(h.value)), h.exact_zero ? "true" : "false"});
  }
  for (const auto& u : res.uncertain) unc.push_back(u.to_string(ds));
  out.details = {{"n", n},
                 {"r", rq.get_str()},
                 {"hits", hits},
                 {"minimizer", res.minimizer ? json(res.hits[*res.minimizer].poly.to_string(ds)) : json(nullptr)},
                 {"uncertain", unc},
                 {"certified", res.certified}};
  return out;
}

inline Report cmd_garsia(Context& cx) {
  const auto& s = cx.spec();
  std::vector<int> ns;
  if (const json* v = cx.params.raw("ns")) {
    if (!v->is_array() || v->empty()) throw ValidationError("ns must be a nonempty array", "/params/ns");
    for (std::size_t i = 0; i < v->size(); ++i) {
      mpz_class z = integer_at((*v)[i], "/params/ns/" + std::to_string(i));
      if (z < 1 || z > 62) throw ValidationError("n must lie in [1, 62]", "/params/ns/" + std::to_string(i));
      ns.push_back(static_cast<int>(z.get_si()));
    }
  } else {
    int n_max = static_cast<int>(cx.params.integer("n_max", 12, 1, 62));
    for (int n = 1; n <= n_max; ++n) ns.push_back(n);
  }
  auto g = entropy::garsia_entropy_bracket(s, ns, detail::collapse_options(s, cx.cfg));
  Report r;
  r.quantity = "garsia_entropy_upper";
  r.value = g.upper;
  r.method = g.certified ? "exact rational-weight entropies of collapsed levels, minimum of H_n/n"
                         : "numerically collapsed levels (tolerance 1e-12), minimum of H_n/n";
  r.provenance = {"garsia_entropy_bracket", "level_n_atoms", "shannon_exact"};
  r.precision_bits = cx.cfg.precision;
  json rows = json::array();
  r.table.header = {"n", "H_n", "H_n_radius", "H_n_over_n", "H_n_over_n_radius", "atoms", "exact"};
  for (const auto& row : g.rows) {
    double e = row.exact.error();
    if (row.n == g.argmin) r.error = e / row.n;
    rows.push_back({{"n", row.n}, {"H_n", row.h}, {"H_n_exact", row.exact.to_string()}, {"H_n_over_n", row.h_per_n},
                    {"atoms", row.atoms}});
    r.table.rows.push_back({std::to_string(row.n), shortest(row.h), shortest(e), shortest(row.h_per_n),
                            shortest(e / row.n), std::to_string(row.atoms), row.exact.to_string()});
  }
  r.details = {{"rows", rows},
               {"argmin", g.argmin},
               {"certified", g.certified},
               {"ambiguous", g.ambiguous},
               {"bound_kind", "upper bracket only"}};
  if (g.first_overlap)
    r.details["first_overlap"] = {{"n", g.first_overlap->n},
                                  {"word1", detail::word_json(g.first_overlap->word1)},
                                  {"word2", detail::word_json(g.first_overlap->word2)}};
  return r;
}

inline Report cmd_scale_entropy(Context& cx) {
  const auto& s = cx.spec();
  int n = static_cast<int>(cx.params.integer("n", 8, 1, 40));
  double rr = cx.params.real("r");
  if (!(rr > 0)) throw ValidationError("r must be positive", "/params/r");
  auto e = entropy::level_entropy_at_scale(s, n, rr, detail::collapse_options(s, cx.cfg));
  Report r;
  r.quantity = "entropy_at_scale";
  r.value = e.value;
  r.error = e.error;
  r.method = "breakpoint sweep over t in [0, 1)";
  r.provenance = {"level_entropy_at_scale", "entropy_at_scale", "level_n_atoms"};
  r.precision_bits = cx.cfg.precision;
  r.details = {{"n", n}, {"r", rr}, {"collapse", detail::mode_name(s.certified())}};
  return r;
}

inline Report cmd_phi(Context& cx) {
  const auto& s = cx.spec();
  std::vector<double> as;
  const json* av = cx.params.raw("a");
  if (!av) throw ValidationError("a is required", "/params/a");
  bool from_mtilde = av->is_string() && av->get<std::string>() == "mtilde";
  if (from_mtilde) {
    as.push_back(centre(algebra::mtilde(detail::exact_lambda(s), cx.precision())));
  } else if (av->is_array()) {
    if (av->empty()) throw ValidationError("a must be nonempty", "/params/a");
    for (std::size_t i = 0; i < av->size(); ++i) as.push_back(rational_at((*av)[i], "/params/a/" + std::to_string(i)).get_d());
  } else {
    as.push_back(rational_at(*av, "/params/a").get_d());
  }
  for (std::size_t i = 0; i < as.size(); ++i)
    if (!(as[i] >= 1)) throw ValidationError("a must be at least 1", "/params/a");
  std::vector<double> grid = cx.params.positive_list("grid");
  if (grid.empty()) grid = entropy::default_phi_grid();
  auto o = detail::smoothing(cx.params, cx.cfg);
  auto nu = entropy::PointMasses::plane(detail::translation_measure(s));
  Report r;
  r.quantity = "phi_nu";
  r.method = detail::smoothing_method(o);
  r.provenance = {"phi_nu", "smoothed_entropy"};
  r.precision_bits = 53;
  r.table.header = {"a", "phi", "error", "t_star"};
  json rows = json::array();
  for (double a : as) {
    auto e = entropy::phi_nu(nu, a, grid, o);
    rows.push_back({{"a", a}, {"phi", e.value}, {"error", e.error}, {"t_star", e.t_star}});
    r.table.rows.push_back({shortest(a), shortest(e.value), shortest(e.error), shortest(e.t_star)});
    r.value = e.value;
    r.error = e.error;
  }
  if (as.size() > 1) {
    r.value = nullptr;
    r.error = 0;
  }
  r.details = {{"rows", rows}, {"grid_points", grid.size()}, {"seed", cx.cfg.seed}, {"bound_kind", "grid lower estimate"}};
  return r;
}

inline Report cmd_dim(Context& cx) {
  const auto& s = cx.spec();
  int n_max = static_cast<int>(cx.params.integer("n_max", 20, 1, 40));
  auto d = entropy::dimension_bracket(s, n_max);
  Report r;
  r.quantity = "dimension_upper";
  r.value = d.upper_dim;
  const auto& row = d.garsia.rows[static_cast<std::size_t>(d.garsia.argmin - 1)];
  r.error = d.upper_dim < 1 ? row.exact.error() / row.n / d.lyapunov + 1e-15 : 0;
  r.method = "min(1, min_n (H_n/n) / -log|lambda|) from exact level entropies";
  r.provenance = {"dimension_bracket", "garsia_entropy_bracket", "detect_exact_overlaps"};
  r.precision_bits = cx.cfg.precision;
  r.details = {{"natural_upper", d.natural_upper},
               {"lyapunov", d.lyapunov},
               {"garsia_upper", d.garsia_upper},
               {"argmin", d.garsia.argmin},
               {"n_max", d.n_max},
               {"overlap", d.overlap},
               {"certified_below_one", d.certified_below_one}};
  if (d.witness)
    r.details["witness"] = {{"n", d.witness->n},
                            {"word1", detail::word_json(d.witness->word1)},
                            {"word2", detail::word_json(d.witness->word2)}};
  return r;
}

inline Report cmd_lbphi(Context& cx) {
  const auto& s = cx.spec();
  const auto& eta = detail::exact_lambda(s);
  int n_max = static_cast<int>(cx.params.integer("n_max", 12, 1, 40));
  std::vector<mpq_class> atoms;
  for (std::size_t j = 0; j < s.m(); ++j) {
    const auto& t = s.translations()[j];
    if (!t.is_rational()) throw ValidationError("translations must be rational", "/ifs/translations/" + std::to_string(j));
    atoms.push_back(t.rational_value());
  }
  std::vector<double> grid = cx.params.positive_list("grid");
  if (grid.empty()) grid = entropy::default_phi_grid();
  auto o = detail::smoothing(cx.params, cx.cfg);
  auto rep = entropy::lb_phi_check(eta, atoms, s.probs(), n_max, grid, o, cx.precision());
  Report r;
  r.quantity = "lb_phi_margin";
  r.value = rep.upper - rep.phi.value;
  r.error = rep.phi.error;
  r.method = "upper entropy bracket against the grid estimate of phi at mtilde(lambda)";
  r.provenance = {"lb_phi_check", "garsia_entropy_bracket", "mtilde", "phi_nu"};
  r.precision_bits = cx.cfg.precision;
  r.details = {{"upper", rep.upper},
               {"n_max", rep.n_max},
               {"mtilde", ball_json(rep.mtilde)},
               {"phi", rep.phi.value},
               {"phi_error", rep.phi.error},
               {"t_star", rep.phi.t_star},
               {"consistent", rep.consistent}};
  return r;
}

struct SweepRow {
  std::string label;
  std::string mode;
  std::optional<double> value;
  double radius = 0;
  bool overlap = false;
  std::size_t ambiguous = 0;
  std::string error;
};

inline Report cmd_sweep(Context& cx) {
  const RunConfig& cfg = cx.cfg;
  if (cfg.ifs.is_null()) throw ValidationError("ifs template is required", "/ifs");
  std::string q = cx.params.choice("quantity", "deltan", {"deltan", "garsia", "scale-entropy", "overlap", "dim"});
  int n = static_cast<int>(cx.params.integer("n", 8, 1, 62));
  int n_max = static_cast<int>(cx.params.integer("n_max", 12, 1, 40));
  double rr = q == "scale-entropy" ? cx.params.real("r") : 0;
  if (q == "scale-entropy" && !(rr > 0)) throw ValidationError("r must be positive", "/params/r");

  // Grid entries: "a/b" is exact, a plain decimal is a numeric enclosure,
  // an object is a full lambda spec.
  std::vector<json> grid;
  const json* gv = cx.params.raw("grid");
  if (!gv) throw ValidationError("grid is required", "/params/grid");
  if (gv->is_object()) {
    mpq_class a = rational_at(gv->value("start", json()), "/params/grid/start");
    mpq_class b = rational_at(gv->value("stop", json()), "/params/grid/stop");
    mpq_class h = rational_at(gv->value("step", json()), "/params/grid/step");
    if (h <= 0) throw ValidationError("step must be positive", "/params/grid/step");
    mpq_class count_q = (b - a) / h;
    if (count_q > 100000) throw ValidationError("grid too large", "/params/grid");
    for (mpq_class x = a; x <= b; x += h) grid.push_back({{"decimal", detail::decimal_text(x)}});
  } else if (gv->is_array()) {
    for (std::size_t i = 0; i < gv->size(); ++i) {
      const json& e = (*gv)[i];
      if (e.is_object()) {
        grid.push_back(e);
      } else {
        std::string t = detail::json_text(e, "/params/grid/" + std::to_string(i));
        grid.push_back(t.find('/') != std::string::npos ? json{{"rational", t}} : json{{"decimal", t}});
      }
    }
  } else {
    throw ValidationError("grid must be an array or {start, stop, step}", "/params/grid");
  }
  if (cfg.ifs.contains("lambda")) ifs_at(cfg.ifs, cfg.context());

  std::vector<SweepRow> rows(grid.size());
  auto eval_row = [&](std::size_t i) {
    SweepRow& row = rows[i];
    const json& g = grid[i];
    if (g.contains("rational")) row.label = detail::json_text(g["rational"], "");
    else if (g.contains("decimal")) row.label = detail::json_text(g["decimal"], "");
    else row.label = g.dump();
    try {
      ifs::IFSSpec s = ifs_at(cfg.ifs, cfg.context(), "/ifs", &g);
      row.mode = detail::mode_name(s.certified());
      if (q == "deltan") {
        auto d = ifs::delta_n(s, n, detail::search_options(cfg));
        if (d.has_nonzero) {
          row.value = centre(d.delta);
          row.radius = radius_up(d.delta);
        }
        row.overlap = d.overlap;
      } else if (q == "garsia") {
        std::vector<int> ns;
        for (int k = 1; k <= n_max; ++k) ns.push_back(k);
        auto b = entropy::garsia_entropy_bracket(s, ns, detail::collapse_options(s, cfg));
        row.value = b.upper;
        row.radius = b.rows[static_cast<std::size_t>(b.argmin - 1)].exact.error() / b.argmin;
        row.overlap = b.first_overlap.has_value();
        row.ambiguous = b.ambiguous;
      } else if (q == "scale-entropy") {
        auto e = entropy::level_entropy_at_scale(s, n, rr, detail::collapse_options(s, cfg));
        row.value = e.value;
        row.radius = e.error;
      } else if (q == "overlap") {
        auto w = ifs::detect_exact_overlaps(s, n_max, detail::collapse_options(s, cfg).max_atoms);
        row.overlap = w.has_value();
        if (w) row.value = w->n;
      } else {
        auto d = entropy::dimension_bracket(s, n_max);
        row.value = d.upper_dim;
        row.overlap = d.overlap;
      }
    } catch (const Error& e) {
      row.error = std::string(e.kind()) + ": " + e.what();
    } catch (const std::bad_alloc&) {
      row.error = "BudgetExceeded: out of memory";
    } catch (const std::exception& e) {
      row.error = std::string("Error: ") + e.what();
    }
  };

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < rows.size();) eval_row(i);
  };
  const unsigned nt = std::max(1u, std::min<unsigned>(cfg.threads, static_cast<unsigned>(rows.size())));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < nt; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  Report r;
  r.quantity = "sweep_" + q;
  r.method = "one independent run per grid value";
  r.provenance = {"sweep"};
  r.precision_bits = cfg.precision;
  r.table.header = {"index", "lambda", "mode", "value", "radius", "overlap", "ambiguous", "error"};
  json jrows = json::array();
  std::size_t ok = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (row.error.empty()) ++ok;
    jrows.push_back({{"index", i},
                     {"lambda", row.label},
                     {"mode", row.mode},
                     {"value", row.value ? number_or_null(*row.value) : json(nullptr)},
                     {"radius", row.radius},
                     {"overlap", row.overlap},
                     {"ambiguous", row.ambiguous},
                     {"error", row.error.empty() ? json(nullptr) : json(row.error)}});
    r.table.rows.push_back({std::to_string(i), row.label, row.mode, row.value ? shortest(*row.value) : "",
                            shortest(row.radius), row.overlap ? "true" : "false", std::to_string(row.ambiguous),
                            row.error});
  }
  r.value = ok;
  r.details = {{"rows", jrows}, {"row_errors", rows.size() - ok}};
  return r;
}

inline Report dispatch(Context& cx) {
  const std::string& c = cx.cfg.command;
  if (c == "mahler") return cmd_mahler(cx, false);
  if (c == "height") return cmd_mahler(cx, true);
  if (c == "overlap") return cmd_overlap(cx);
  if (c == "deltan") return cmd_deltan(cx);
  if (c == "sep-probe") return cmd_sep_probe(cx);
  if (c == "near-overlap") return cmd_near_overlap(cx);
  if (c == "garsia") return cmd_garsia(cx);
  if (c == "scale-entropy") return cmd_scale_entropy(cx);
  if (c == "phi") return cmd_phi(cx);
  if (c == "dim") return cmd_dim(cx);
  if (c == "lbphi-check") return cmd_lbphi(cx);
  return cmd_sweep(cx);
}

inline int exit_code_for(const Error& e) {
  if (dynamic_cast<const ValidationError*>(&e)) return 2;
  if (dynamic_cast<const NoConvergence*>(&e) || dynamic_cast<const BudgetExceeded*>(&e) ||
      dynamic_cast<const AmbiguousBreakpoint*>(&e) || dynamic_cast<const AmbiguousCollapse*>(&e) ||
      dynamic_cast<const DegenerateRoot*>(&e) || dynamic_cast<const BallContainsZero*>(&e))
    return 3;
  return 1;
}

/// Runs one command. The report goes to `out`; a JSON error object goes to `err`.
inline int run(const RunConfig& cfg, std::ostream& out, std::ostream& err, const std::string& timestamp = utc_timestamp()) {
  auto fail = [&](int code, const std::string& kind, const std::string& msg, const std::string& ptr) {
    json e{{"error", {{"kind", kind}, {"message", msg}, {"pointer", ptr}}},
           {"exit_code", code},
           {"input", cfg.echo()},
           {"version", kVersion}};
    err << e.dump(2) << "\n";
    return code;
  };
  try {
    cfg.validate();
    Params params(cfg.params);
    Context cx{cfg, params, std::nullopt};
    bool sweep = cfg.command == "sweep";
    if (!cfg.ifs.is_null() && !sweep) cx.ifs.emplace(ifs_at(cfg.ifs, cfg.context()));
    Report r;
    try {
      r = dispatch(cx);
    } catch (const ValidationError& e) {
      if (e.pointer().rfind("/lambda", 0) == 0 && !sweep) throw ValidationError(e.what(), "/ifs" + e.pointer());
      throw;
    }
    params.finish();
    RunConfig echoed = cfg;
    echoed.params = params.resolved();
    if (cfg.format == "json")
      out << report_json(r, echoed.echo(), timestamp).dump(2) << "\n";
    else
      write_csv(r, out);
    return 0;
  } catch (const ValidationError& e) {
    return fail(2, e.kind(), e.what(), e.pointer());
  } catch (const Error& e) {
    return fail(exit_code_for(e), e.kind(), e.what(), "");
  } catch (const std::bad_alloc&) {
    return fail(3, "BudgetExceeded", "out of memory", "");
  } catch (const std::exception& e) {
    return fail(1, "Error", e.what(), "");
  }
}

}  // namespace selfsim::cli
