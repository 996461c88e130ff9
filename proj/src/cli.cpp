#include "alab/cli.hpp"

#include "alab/dynamics.hpp"
#include "alab/fmm.hpp"
#include "alab/greens.hpp"
#include "alab/parallel.hpp"
#include "alab/rankone.hpp"
#include "alab/spectral.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <sstream>

namespace alab::cli {

namespace fs = std::filesystem;

namespace {

enum class FieldType { number, integer, count, int_list, number_list, site, interval, complex_list, boolean, string, object };

struct Field {
  std::string key;
  FieldType type;
  json fallback;  // discarded: required
};

const json kRequired(json::value_t::discarded);

const std::set<std::string> kDensityKinds = {"fmm-decay", "decoupling-scan", "second-moment"};

bool uses_lattice(const std::string& kind) { return kind != "decoupling-scan" && kind != "rankone-verify"; }

[[noreturn]] void fail(const std::string& msg) { throw ConfigError(msg); }

void check_type(const std::string& path, const json& v, FieldType type, int d) {
  auto bad = [&](const char* want) { fail("key '" + path + "' must be " + want + ", got " + v.dump()); };
  switch (type) {
    case FieldType::number:
      if (!v.is_number()) bad("a number");
      break;
    case FieldType::integer:
      if (!v.is_number_integer()) bad("an integer");
      break;
    case FieldType::count:
      if (!v.is_number_integer() || v.get<long long>() < 1) bad("a positive integer");
      break;
    case FieldType::boolean:
      if (!v.is_boolean()) bad("a boolean");
      break;
    case FieldType::string:
      if (!v.is_string()) bad("a string");
      break;
    case FieldType::object:
      if (!v.is_object()) bad("an object");
      break;
    case FieldType::int_list:
      if (!v.is_array() || v.empty()) bad("a nonempty list of integers");
      for (const auto& e : v) {
        if (!e.is_number_integer()) bad("a nonempty list of integers");
      }
      break;
    case FieldType::number_list:
      if (!v.is_array() || v.empty()) bad("a nonempty list of numbers");
      for (const auto& e : v) {
        if (!e.is_number()) bad("a nonempty list of numbers");
      }
      break;
    case FieldType::site:
      if (!v.is_array() || static_cast<int>(v.size()) != d) bad("a list of d integers");
      for (const auto& e : v) {
        if (!e.is_number_integer()) bad("a list of d integers");
      }
      break;
    case FieldType::interval:
      if (v.is_null()) break;
      if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number() ||
          !(v[0].get<double>() < v[1].get<double>())) {
        bad("null (whole line) or [lo, hi] with lo < hi");
      }
      break;
    case FieldType::complex_list:
      if (!v.is_array() || v.empty()) bad("a nonempty list of [re, im] pairs");
      for (const auto& e : v) {
        if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number()) {
          bad("a nonempty list of [re, im] pairs");
        }
      }
      break;
  }
}

// Fills defaults, rejects unknown keys and checks types.
json resolve_block(const std::string& block, const json& raw, const std::vector<Field>& fields, int d,
                   std::vector<std::string>& defaults) {
  if (!raw.is_null() && !raw.is_object()) fail("'" + block + "' must be an object");
  std::set<std::string> known;
  for (const auto& f : fields) known.insert(f.key);
  if (raw.is_object()) {
    for (const auto& [key, value] : raw.items()) {
      if (!known.count(key)) fail("unknown key '" + block + "." + key + "'");
    }
  }
  json out = json::object();
  for (const auto& f : fields) {
    const std::string path = block + "." + f.key;
    if (raw.is_object() && raw.contains(f.key)) {
      check_type(path, raw.at(f.key), f.type, d);
      out[f.key] = raw.at(f.key);
    } else if (!f.fallback.is_discarded()) {
      out[f.key] = f.fallback;
      defaults.push_back(path + " = " + f.fallback.dump());
    } else {
      fail("missing required key '" + path + "'");
    }
  }
  return out;
}

json integer_range(int lo, int hi) {
  json a = json::array();
  for (int r = lo; r <= hi; ++r) a.push_back(r);
  return a;
}

json axis_site_json(int d, int r) {
  json a = json::array();
  for (int i = 0; i < d; ++i) a.push_back(i == 0 ? r : 0);
  return a;
}

std::vector<Field> method_fields(const std::string& kind, const ModelSettings& m) {
  const json origin = axis_site_json(m.d, 0);
  const json whole = nullptr;
  if (kind == "spectrum-scan") return {{"L_list", FieldType::int_list, json::array({m.L})}};
  if (kind == "fmm-decay") {
    return {{"s", FieldType::number, 0.5},
            {"E", FieldType::number, 0.0},
            {"epsilon", FieldType::number, 1e-3},
            {"x0", FieldType::site, origin},
            {"distances", FieldType::int_list, integer_range(0, m.L)}};
  }
  if (kind == "decoupling-scan") {
    json axis = json::array();
    for (const Complex& c : default_decoupling_axis()) axis.push_back({c.real(), c.imag()});
    return {{"s", FieldType::number, 0.5}, {"axis", FieldType::complex_list, axis}};
  }
  if (kind == "second-moment") {
    return {{"s", FieldType::number, 0.5},
            {"E", FieldType::number, 0.5},
            {"epsilons", FieldType::number_list, json::array({1e-1, 1e-2, 1e-3})},
            {"x", FieldType::site, origin},
            {"y", FieldType::site, origin}};
  }
  if (kind == "dynloc") {
    return {{"interval", FieldType::interval, whole},
            {"x0", FieldType::site, origin},
            {"distances", FieldType::int_list, integer_range(0, m.L)},
            {"t_min", FieldType::number, 0.1},
            {"t_max", FieldType::number, 1e3},
            {"points", FieldType::count, 512}};
  }
  if (kind == "position-moment") {
    return {{"interval", FieldType::interval, whole}, {"start", FieldType::site, origin},
            {"p", FieldType::number, 1.0},           {"t_max", FieldType::number, 1e3},
            {"points", FieldType::count, 512},       {"margin", FieldType::integer, -1}};
  }
  if (kind == "rage") {
    return {{"interval", FieldType::interval, whole},
            {"start", FieldType::site, origin},
            {"radii", FieldType::int_list, json::array({std::max(1, m.L / 2)})},
            {"t_max", FieldType::number, 1e3},
            {"margin", FieldType::integer, -1}};
  }
  if (kind == "lifshitz") {
    return {{"beta", FieldType::number, 2.0 / (m.d + 2.0)}, {"L_list", FieldType::int_list, json::array({m.L})}};
  }
  if (kind == "ids") {
    const SupportInterval supp = support(m.distribution);
    return {{"E_min", FieldType::number, -2.0 * m.d + m.lambda * supp.lo - 0.1},
            {"E_max", FieldType::number, 2.0 * m.d + m.lambda * supp.hi + 0.1},
            {"points", FieldType::count, 201}};
  }
  if (kind == "level-stats") {
    return {{"window", FieldType::number_list, json::array({0.4, 0.6})}, {"significance", FieldType::number, 0.01}};
  }
  if (kind == "rankone-verify") {
    return {{"size", FieldType::count, 6},
            {"instances", FieldType::count, 100},
            {"v_values", FieldType::number_list, json::array({-3.0, 0.0, 3.0})},
            {"identity_size", FieldType::count, 4},
            {"identity_instances", FieldType::count, 20},
            {"s", FieldType::number, 0.5},
            {"flow_range", FieldType::number, 10.0},
            {"flow_points", FieldType::count, 41}};
  }
  if (kind == "krein-verify") {
    return {{"E", FieldType::number, 0.0},
            {"epsilon", FieldType::number, 0.1},
            {"x", FieldType::site, origin},
            {"y", FieldType::site, axis_site_json(m.d, std::min(1, m.L))}};
  }
  if (kind == "geometric-identity") {
    return {{"inner_L", FieldType::integer, std::max(0, m.L / 2)},
            {"E", FieldType::number, 0.0},
            {"epsilon", FieldType::number, 0.1}};
  }
  fail("unknown experiment kind '" + kind + "'");
}

Interval interval_of(const json& j) {
  if (j.is_null()) return Interval::whole();
  return Interval{j[0].get<double>(), j[1].get<double>()};
}

Site site_of(const json& j) {
  Site s(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) s(static_cast<Eigen::Index>(i)) = j[i].get<int>();
  return s;
}

// CSV with a header row, units in brackets; numbers as %.17g.
class Csv {
 public:
  Csv(const fs::path& path, const std::vector<std::string>& header) : out_(path) {
    if (!out_) throw NumericError("cannot open " + path.string() + " for writing");
    write(header);
  }

  void write(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << '\n';
  }

 private:
  std::ofstream out_;
};

std::string num(double v) { return format_number(v); }
std::string num(long long v) { return std::to_string(v); }
std::string num(std::size_t v) { return std::to_string(v); }
std::string num(int v) { return std::to_string(v); }
std::string num(bool v) { return v ? "1" : "0"; }

json fit_json(const DecayFit& f) {
  return {{"rate", f.rate},
          {"log_prefactor", f.log_prefactor},
          {"r_squared", f.r_squared},
          {"slope_stderr", f.slope_stderr},
          {"points_used", f.points_used}};
}

struct Context {
  const ExperimentConfig& c;
  fs::path out;
  json results = json::object();
  json audits = json::object();
};

ComplexEnergy energy_of(const json& m) { return ComplexEnergy{m.at("E").get<double>(), m.at("epsilon").get<double>()}; }

Box model_box(const Context& ctx) { return Box(ctx.c.model.d, ctx.c.model.L); }

void run_spectrum_scan(Context& ctx) {
  const auto& m = ctx.c.model;
  const auto rows = spectrum_support_scan(m.d, m.distribution, m.lambda, ctx.c.method.at("L_list").get<std::vector<int>>(),
                                          ctx.c.run.n, ctx.c.run.seed, ctx.c.run.workers);
  Csv csv(ctx.out / "spectrum.csv", {"L[lattice]", "min_eig[energy]", "max_eig[energy]", "predicted_lo[energy]", "predicted_hi[energy]", "all_inside"});
  json arr = json::array();
  bool inside = true;
  for (const auto& r : rows) {
    csv.write({num(r.half_side), num(r.min_eig), num(r.max_eig), num(r.predicted_lo), num(r.predicted_hi),
               num(r.all_inside)});
    arr.push_back({{"L", r.half_side}, {"min_eig", r.min_eig}, {"max_eig", r.max_eig},
                   {"predicted_lo", r.predicted_lo}, {"predicted_hi", r.predicted_hi}});
    inside = inside && r.all_inside;
  }
  ctx.results["rows"] = arr;
  ctx.audits["eigenvalues_inside_predicted_interval"] = inside;
}

void run_fmm_decay(Context& ctx) {
  const auto& m = ctx.c.model;
  const auto& me = ctx.c.method;
  const DecayProfile p = decay_profile(model_box(ctx), m.distribution, m.lambda, me.at("s").get<double>(),
                                       energy_of(me), site_of(me.at("x0")), me.at("distances").get<std::vector<int>>(),
                                       ctx.c.run.n, ctx.c.run.seed, ctx.c.run.workers);
  Csv csv(ctx.out / "decay.csv", {"distance[lattice]", "mean_abs_g_s[energy^-s]", "stderr[energy^-s]", "n", "s"});
  for (std::size_t k = 0; k < p.distances.size(); ++k) {
    const Estimate& e = p.estimates[k];
    csv.write({num(p.distances[k]), num(e.mean), num(e.std_error), num(e.n), num(e.s)});
  }
  ctx.results["fit"] = fit_json(p.fit);
  ctx.results["green_rate"] = p.green_rate();
  ctx.results["singular_retries"] = p.estimates.empty() ? 0 : p.estimates.front().singular_retries;
  ctx.audits["rate_positive_5_stderr"] = p.fit.rate > 5.0 * p.fit.slope_stderr;
}

void run_decoupling_scan(Context& ctx) {
  const auto& me = ctx.c.method;
  const double s = me.at("s").get<double>();
  std::vector<Complex> axis;
  for (const auto& e : me.at("axis")) axis.emplace_back(e[0].get<double>(), e[1].get<double>());
  const RatioBound b = decoupling_scan(ctx.c.model.distribution, s, product_grid(axis));
  Csv csv(ctx.out / "decoupling.csv", {"eta_re[energy]", "eta_im[energy]", "beta_re[energy]", "beta_im[energy]", "ratio"});
  for (std::size_t k = 0; k < b.grid.size(); ++k) {
    const auto& [eta, beta] = b.grid[k];
    csv.write({num(eta.real()), num(eta.imag()), num(beta.real()), num(beta.imag()), num(b.ratios[k])});
  }
  ctx.results["max_ratio"] = b.max_ratio;
  ctx.results["apriori_constant"] = apriori_constant(ctx.c.model.distribution, s);
  ctx.audits["all_ratios_finite"] = b.all_finite;
}

void run_second_moment(Context& ctx) {
  const auto& m = ctx.c.model;
  const auto& me = ctx.c.method;
  std::vector<ComplexEnergy> zs;
  for (double eps : me.at("epsilons").get<std::vector<double>>()) zs.push_back({me.at("E").get<double>(), eps});
  const auto rows = second_moment_audit(model_box(ctx), m.distribution, m.lambda, me.at("s").get<double>(), zs,
                                        site_of(me.at("x")), site_of(me.at("y")), ctx.c.run.n, ctx.c.run.seed,
                                        ctx.c.run.workers);
  Csv csv(ctx.out / "second_moment.csv", {"epsilon[energy]", "E[energy]", "mean_abs_g_2[energy^-2]",
                                           "stderr_abs_g_2[energy^-2]", "mean_abs_g_s[energy^-s]",
                                           "stderr_abs_g_s[energy^-s]", "eps_times_mean_abs_g_2[energy^-1]",
                                           "ratio[energy^(s-1)]", "ratio_stderr[energy^(s-1)]"});
  json arr = json::array();
  for (const auto& r : rows) {
    csv.write({num(r.z.eps), num(r.z.E), num(r.second.mean), num(r.second.std_error), num(r.fractional.mean),
               num(r.fractional.std_error), num(r.lhs), num(r.ratio), num(r.ratio_stderr)});
    arr.push_back({{"epsilon", r.z.eps}, {"ratio", r.ratio}, {"ratio_stderr", r.ratio_stderr}});
  }
  ctx.results["rows"] = arr;
  ctx.results["one_site_limit"] = std::numbers::pi / (2.0 * std::numbers::sqrt2);
}

void run_dynloc(Context& ctx) {
  const auto& m = ctx.c.model;
  const auto& me = ctx.c.method;
  const auto times = log_time_grid(me.at("t_min").get<double>(), me.at("t_max").get<double>(),
                                   me.at("points").get<std::size_t>());
  const DynlocProfile p = dynloc_profile(model_box(ctx), m.distribution, m.lambda, interval_of(me.at("interval")),
                                         site_of(me.at("x0")), me.at("distances").get<std::vector<int>>(), times,
                                         ctx.c.run.n, ctx.c.run.seed, ctx.c.run.workers);
  Csv csv(ctx.out / "dynloc.csv", {"distance[lattice]", "mean_sup_kernel", "stderr", "mean_sup_kernel_refined"});
  for (std::size_t k = 0; k < p.distances.size(); ++k) {
    csv.write({num(p.distances[k]), num(p.estimates[k].mean), num(p.estimates[k].std_error),
               num(p.refined_estimates[k].mean)});
  }
  ctx.results["fit"] = fit_json(p.fit);
  ctx.results["grid_excess"] = p.grid_excess;
  ctx.audits["grid_adequate"] = p.grid_adequate;
  ctx.audits["rate_positive_5_stderr"] = p.fit.rate > 5.0 * p.fit.slope_stderr;
}

void run_position_moment(Context& ctx) {
  const auto& m = ctx.c.model;
  const auto& me = ctx.c.method;
  const auto times = uniform_time_grid(me.at("t_max").get<double>(), me.at("points").get<std::size_t>());
  const MomentTrace t = mean_position_moment(model_box(ctx), m.distribution, m.lambda, interval_of(me.at("interval")),
                                             site_of(me.at("start")), me.at("p").get<double>(), times, ctx.c.run.n,
                                             ctx.c.run.seed, ctx.c.run.workers, me.at("margin").get<int>());
  Csv csv(ctx.out / "moment.csv", {"t[time]", "mean_moment[lattice^p]"});
  for (std::size_t a = 0; a < t.times.size(); ++a) csv.write({num(t.times[a]), num(t.values[a])});
  const Saturation s = saturation(t);
  ctx.results["early_max"] = s.early_max;
  ctx.results["late_max"] = s.late_max;
  ctx.results["relative_change"] = s.relative_change;
  ctx.audits["saturated_within_20_percent"] = s.relative_change <= 0.2;
}

void run_rage(Context& ctx) {
  const auto& m = ctx.c.model;
  const auto& me = ctx.c.method;
  const auto radii = me.at("radii").get<std::vector<int>>();
  const auto est = mean_rage_average(model_box(ctx), m.distribution, m.lambda, interval_of(me.at("interval")),
                                     site_of(me.at("start")), radii, me.at("t_max").get<double>(), ctx.c.run.n,
                                     ctx.c.run.seed, ctx.c.run.workers, me.at("margin").get<int>());
  Csv csv(ctx.out / "rage.csv", {"R[lattice]", "escape_mass", "stderr"});
  json arr = json::array();
  bool bounded = true;
  for (std::size_t k = 0; k < radii.size(); ++k) {
    csv.write({num(radii[k]), num(est[k].mean), num(est[k].std_error)});
    arr.push_back({{"R", radii[k]}, {"escape_mass", est[k].mean}, {"stderr", est[k].std_error}});
    bounded = bounded && est[k].mean >= 0.0 && est[k].mean <= 1.0;
  }
  ctx.results["rows"] = arr;
  ctx.audits["escape_mass_in_unit_interval"] = bounded;
}

void run_lifshitz(Context& ctx) {
  const auto& m = ctx.c.model;
  const auto& me = ctx.c.method;
  const auto probes = lifshitz_tail(m.d, m.distribution, m.lambda, me.at("beta").get<double>(),
                                    me.at("L_list").get<std::vector<int>>(), ctx.c.run.n, ctx.c.run.seed,
                                    ctx.c.run.workers);
  Csv csv(ctx.out / "lifshitz.csv", {"L[lattice]", "threshold[energy]", "successes", "n", "tail_probability", "stderr", "upper_bound"});
  bool decreasing = true;
  for (std::size_t k = 0; k < probes.size(); ++k) {
    const auto& p = probes[k];
    csv.write({num(p.half_side), num(p.threshold), num(p.successes), num(p.n), num(p.probability), num(p.std_error),
               num(p.upper_bound)});
    if (k > 0 && !(p.probability < probes[k - 1].probability)) decreasing = false;
  }
  ctx.audits["strictly_decreasing"] = decreasing;
  if (probes.size() >= 3) {
    const LinearFit f = lifshitz_fit(probes, m.d);
    ctx.results["fit"] = {{"slope", f.slope}, {"intercept", f.intercept}, {"r_squared", f.r_squared}};
    ctx.audits["slope_negative_r2_0.8"] = f.slope < 0.0 && f.r_squared >= 0.8;
  }
}

void run_ids(Context& ctx) {
  const auto& m = ctx.c.model;
  const auto& me = ctx.c.method;
  const double lo = me.at("E_min").get<double>();
  const double hi = me.at("E_max").get<double>();
  const auto points = me.at("points").get<std::size_t>();
  std::vector<double> grid(points);
  for (std::size_t i = 0; i < points; ++i) {
    grid[i] = points == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
  }
  const IdsCurve c = ids_estimate(m.d, m.distribution, m.lambda, m.L, ctx.c.run.n, grid, ctx.c.run.seed,
                                  ctx.c.run.workers);
  Csv csv(ctx.out / "ids.csv", {"E[energy]", "N[per_site]"});
  bool monotone = true;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    csv.write({num(c.energies[i]), num(c.values[i])});
    if (i > 0 && c.values[i] < c.values[i - 1]) monotone = false;
  }
  ctx.audits["nondecreasing"] = monotone;
}

void run_level_stats(Context& ctx) {
  const auto& m = ctx.c.model;
  const auto& me = ctx.c.method;
  const auto w = me.at("window").get<std::vector<double>>();
  if (w.size() != 2) throw ConfigError("key 'method.window' must hold two fractions");
  const LevelStatistics ls = level_statistics(m.d, m.distribution, m.lambda, m.L, ctx.c.run.n, {w[0], w[1]},
                                              ctx.c.run.seed, me.at("significance").get<double>(), ctx.c.run.workers);
  Csv csv(ctx.out / "spacings.csv", {"spacing[mean_spacing]"});
  for (double sp : ls.spacings) csv.write({num(sp)});
  ctx.results["spacings"] = ls.spacings.size();
  ctx.results["ks_distance"] = ls.ks_distance;
  ctx.results["p_value"] = ls.p_value;
  ctx.audits["poisson_not_rejected"] = !ls.rejects_poisson;
}

void run_rankone(Context& ctx) {
  const auto& me = ctx.c.method;
  std::mt19937_64 rng(ctx.c.run.seed);
  const auto size = me.at("size").get<Eigen::Index>();
  const auto count = me.at("instances").get<std::size_t>();
  const auto vs = me.at("v_values").get<std::vector<double>>();
  std::vector<RankOneInstance> instances;
  for (std::size_t i = 0; i < count; ++i) instances.push_back(random_instance(size, rng));

  Csv inter(ctx.out / "intertwine.csv", {"instance", "v[energy]", "slack[energy]", "passed", "flagged"});
  Csv deriv(ctx.out / "derivative.csv", {"instance", "v[energy]", "k", "numeric", "overlap", "difference"});
  bool all_inter = true;
  double worst_derivative = 0.0;
  double min_overlap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < count; ++i) {
    for (double v : vs) {
      const IntertwineReport r = intertwine_check(instances[i], v);
      inter.write({num(i), num(v), num(r.slack), num(r.passed), num(r.flagged)});
      all_inter = all_inter && r.passed;
      for (Eigen::Index k = 0; k < size; ++k) {
        const DerivativeCheck d = derivative_check(instances[i], v, k);
        deriv.write({num(i), num(v), num(static_cast<long long>(k)), num(d.numeric), num(d.overlap), num(d.difference)});
        worst_derivative = std::max(worst_derivative, d.difference);
        min_overlap = std::min(min_overlap, d.overlap);
      }
    }
  }

  // Flow table for the first instance.
  const double range = me.at("flow_range").get<double>();
  const auto fp = me.at("flow_points").get<std::size_t>();
  std::vector<double> vgrid(fp);
  for (std::size_t a = 0; a < fp; ++a) {
    vgrid[a] = fp == 1 ? 0.0 : -range + 2.0 * range * static_cast<double>(a) / static_cast<double>(fp - 1);
  }
  if (!instances.empty()) {
    const EigenFlow flow = eigenflow(instances.front(), vgrid);
    std::vector<std::string> header{"v[energy]"};
    for (Eigen::Index k = 1; k <= size; ++k) header.push_back("E_" + std::to_string(k) + "[energy]");
    Csv csv(ctx.out / "flow.csv", header);
    for (std::size_t a = 0; a < fp; ++a) {
      std::vector<std::string> row{num(vgrid[a])};
      for (Eigen::Index k = 0; k < size; ++k) row.push_back(num(flow.energies(static_cast<Eigen::Index>(a), k)));
      csv.write(row);
    }
  }

  const auto isize = me.at("identity_size").get<Eigen::Index>();
  const auto icount = me.at("identity_instances").get<std::size_t>();
  const double s = me.at("s").get<double>();
  Csv ident(ctx.out / "identity.csv", {"instance", "lo[energy]", "hi[energy]", "lhs", "rhs", "relative_gap"});
  double worst_gap = 0.0;
  for (std::size_t i = 0; i < icount; ++i) {
    const RankOneInstance inst = random_instance(isize, rng);
    const Eigen::VectorXd ev = eigenvalues(inst.h0);
    // An interval strictly between two neighbouring eigenvalues of h0.
    const Eigen::Index j = static_cast<Eigen::Index>(i % static_cast<std::size_t>(std::max<Eigen::Index>(isize - 1, 1)));
    const double gap = isize > 1 ? ev(j + 1) - ev(j) : 1.0;
    const Interval interval{ev(j) + 0.25 * gap, ev(j) + 0.75 * gap};
    const IdentityCheck c = correlator_identity_check(inst, interval, s);
    ident.write({num(i), num(interval.lo), num(interval.hi), num(c.lhs), num(c.rhs), num(c.relative_gap)});
    worst_gap = std::max(worst_gap, c.relative_gap);
  }
  ctx.results["max_derivative_difference"] = worst_derivative;
  ctx.results["min_overlap"] = min_overlap;
  ctx.results["max_identity_gap"] = worst_gap;
  ctx.audits["intertwining_all_pass"] = all_inter;
  ctx.audits["derivative_within_1e-6"] = worst_derivative <= 1e-6;
  ctx.audits["overlap_positive"] = min_overlap > 0.0;
  ctx.audits["identity_gap_within_1e-6"] = worst_gap <= 1e-6;
}

void run_krein(Context& ctx) {
  const auto& m = ctx.c.model;
  const auto& me = ctx.c.method;
  const Box box = model_box(ctx);
  const ComplexEnergy z = energy_of(me);
  const Site x = site_of(me.at("x"));
  const Site y = site_of(me.at("y"));
  struct Row {
    double difference;
    double im_a_top;
  };
  const auto rows = map_indices(ctx.c.run.n, ctx.c.run.workers, [&](std::size_t i) {
    const Hamiltonian h = sample_hamiltonian(box, m.distribution, m.lambda, SeedSpec{ctx.c.run.seed, i});
    const KreinBlock k = krein_block(h, x, y, z);
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(imaginary_part(k.a), Eigen::EigenvaluesOnly);
    return Row{k.max_difference, es.eigenvalues().maxCoeff()};
  });
  Csv csv(ctx.out / "krein.csv", {"realization", "max_difference[energy^-1]", "im_a_top_eigenvalue[energy]"});
  double worst = 0.0;
  bool negative = true;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    csv.write({num(i), num(rows[i].difference), num(rows[i].im_a_top)});
    worst = std::max(worst, rows[i].difference);
    negative = negative && rows[i].im_a_top < 0.0;
  }
  ctx.results["max_residual"] = worst;
  ctx.audits["residual_within_1e-9"] = worst <= 1e-9;
  if (z.eps > 0.0) ctx.audits["im_a_negative_definite"] = negative;
}

void run_geometric(Context& ctx) {
  const auto& m = ctx.c.model;
  const auto& me = ctx.c.method;
  const Box box = model_box(ctx);
  const ComplexEnergy z = energy_of(me);
  const int inner = me.at("inner_L").get<int>();
  const auto cols = default_identity_columns(box, inner);
  const auto rows = map_indices(ctx.c.run.n, ctx.c.run.workers, [&](std::size_t i) {
    const Hamiltonian h = sample_hamiltonian(box, m.distribution, m.lambda, SeedSpec{ctx.c.run.seed, i});
    return geometric_identity(h, inner, z, cols);
  });
  Csv csv(ctx.out / "geometric.csv", {"realization", "residual[energy^-1]", "far_leading_terms[energy^-1]"});
  double worst = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    csv.write({num(i), num(rows[i].residual), num(rows[i].far_leading_terms)});
    worst = std::max(worst, rows[i].residual);
  }
  ctx.results["max_residual"] = worst;
  ctx.audits["residual_within_1e-9"] = worst <= 1e-9;
}

}  // namespace

const std::vector<std::string>& experiment_kinds() {
  static const std::vector<std::string> kinds = {
      "spectrum-scan", "fmm-decay", "decoupling-scan", "second-moment", "dynloc",         "position-moment",
      "rage",          "lifshitz",  "ids",             "level-stats",   "rankone-verify", "krein-verify",
      "geometric-identity"};
  return kinds;
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void apply_override(json& raw, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) fail("--set expects key=value, got '" + assignment + "'");
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  json* node = &raw;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string part = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) fail("--set has an empty path component in '" + path + "'");
    if (!node->is_object()) {
      if (!node->is_null()) fail("--set path '" + path + "' runs through a non-object");
      *node = json::object();
    }
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    start = dot + 1;
  }
}

Distribution parse_distribution(const json& j) {
  if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string()) {
    fail("key 'model.distribution' must be an object with a string 'kind'");
  }
  const std::string kind = j.at("kind").get<std::string>();
  std::vector<std::string> ignored;
  if (kind == "uniform") {
    const json r = resolve_block("model.distribution",
                                 j, {{"kind", FieldType::string, kRequired}, {"a", FieldType::number, 0.0},
                                     {"b", FieldType::number, 1.0}},
                                 1, ignored);
    return make_uniform(r["a"].get<double>(), r["b"].get<double>());
  }
  if (kind == "piecewise") {
    const json r = resolve_block("model.distribution", j,
                                 {{"kind", FieldType::string, kRequired},
                                  {"breakpoints", FieldType::number_list, kRequired},
                                  {"values", FieldType::number_list, kRequired}},
                                 1, ignored);
    return make_piecewise(r["breakpoints"].get<std::vector<double>>(), r["values"].get<std::vector<double>>());
  }
  if (kind == "bernoulli") {
    const json r = resolve_block("model.distribution", j,
                                 {{"kind", FieldType::string, kRequired}, {"a", FieldType::number, 0.0},
                                  {"b", FieldType::number, 1.0}, {"p", FieldType::number, 0.5}},
                                 1, ignored);
    return make_bernoulli(r["a"].get<double>(), r["b"].get<double>(), r["p"].get<double>());
  }
  fail("model.distribution.kind must be uniform, piecewise or bernoulli, got '" + kind + "'");
}

ExperimentConfig resolve_config(const std::string& kind, json raw) {
  const auto& kinds = experiment_kinds();
  if (std::find(kinds.begin(), kinds.end(), kind) == kinds.end()) fail("unknown experiment kind '" + kind + "'");
  if (!raw.is_object()) fail("config must be a JSON object");
  for (const auto& [key, value] : raw.items()) {
    if (key != "kind" && key != "model" && key != "method" && key != "run") fail("unknown key '" + key + "'");
  }
  if (raw.contains("kind") && raw.at("kind") != kind) {
    fail("config kind '" + raw.at("kind").dump() + "' does not match '" + kind + "'");
  }

  ExperimentConfig c;
  c.kind = kind;
  std::vector<std::string> defaults;

  const bool lattice = uses_lattice(kind);
  const json need = kRequired;
  const json model_raw = raw.contains("model") ? raw.at("model") : json(nullptr);
  if (lattice && model_raw.is_null()) fail("missing required key 'model'");
  const json model = resolve_block(
      "model", model_raw,
      {{"d", FieldType::count, lattice ? need : json(1)},
       {"L", FieldType::integer, lattice ? need : json(0)},
       {"lambda", FieldType::number, lattice ? need : json(1.0)},
       {"distribution", FieldType::object, kind == "rankone-verify" ? json{{"kind", "uniform"}, {"a", 0.0}, {"b", 1.0}} : need}},
      1, defaults);
  c.model.d = model["d"].get<int>();
  c.model.L = model["L"].get<int>();
  c.model.lambda = model["lambda"].get<double>();
  if (c.model.L < 0) fail("key 'model.L' must be >= 0");
  if (c.model.lambda < 0.0) fail("key 'model.lambda' must be >= 0");
  try {
    c.model.distribution = parse_distribution(model["distribution"]);
  } catch (const ConfigError&) {
    throw;
  } catch (const InvalidArgument& e) {
    fail(std::string("model.distribution: ") + e.what());
  }
  if (kDensityKinds.count(kind) && !has_density(c.model.distribution)) {
    fail(std::string("no density: experiment '") + kind +
         "' needs a distribution with a bounded density; bernoulli has atoms");
  }

  c.method = resolve_block("method", raw.contains("method") ? raw.at("method") : json(nullptr),
                           method_fields(kind, c.model), c.model.d, defaults);

  const json run = resolve_block("run", raw.contains("run") ? raw.at("run") : json(nullptr),
                                 {{"n", FieldType::count, 100},
                                  {"seed", FieldType::integer, 1},
                                  {"workers", FieldType::count, 1},
                                  {"out", FieldType::string, "results"}},
                                 1, defaults);
  if (!run["seed"].is_number_unsigned() && run["seed"].get<long long>() < 0) fail("key 'run.seed' must be >= 0");
  c.run.n = run["n"].get<std::size_t>();
  c.run.seed = run["seed"].get<std::uint64_t>();
  c.run.workers = run["workers"].get<std::size_t>();
  c.run.out = run["out"].get<std::string>();

  c.resolved = {{"kind", kind}, {"model", model}, {"method", c.method}, {"run", run}};
  c.resolved["model"]["distribution"] = model["distribution"];
  c.defaults_applied = std::move(defaults);
  return c;
}

json read_config_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail("cannot read config file " + path.string());
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) fail("config file " + path.string() + " is not valid JSON");
  return j;
}

ExperimentConfig parse_config(const std::string& kind, const fs::path& path) {
  return resolve_config(kind, read_config_file(path));
}

std::string git_blob_hash(const std::string& content) {
  const std::string blob = "blob " + std::to_string(content.size()) + '\0' + content;
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(blob.data(), blob.size(), digest, &len, EVP_sha1(), nullptr) != 1) {
    throw NumericError("SHA-1 digest failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 15]);
  }
  return out;
}

std::string config_hash(const ExperimentConfig& config) {
  json keyed = config.resolved;
  keyed["run"].erase("workers");
  keyed["run"].erase("out");
  keyed["artifact_version"] = kArtifactVersion;
  return git_blob_hash(keyed.dump(2) + "\n");
}

json run_experiment(const ExperimentConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  const fs::path out(config.run.out);
  fs::create_directories(out);
  {
    std::ofstream f(out / "resolved_config.json");
    f << config.resolved.dump(2) << '\n';
  }
  Context ctx{config, out};
  const std::string& k = config.kind;
  if (k == "spectrum-scan") run_spectrum_scan(ctx);
  else if (k == "fmm-decay") run_fmm_decay(ctx);
  else if (k == "decoupling-scan") run_decoupling_scan(ctx);
  else if (k == "second-moment") run_second_moment(ctx);
  else if (k == "dynloc") run_dynloc(ctx);
  else if (k == "position-moment") run_position_moment(ctx);
  else if (k == "rage") run_rage(ctx);
  else if (k == "lifshitz") run_lifshitz(ctx);
  else if (k == "ids") run_ids(ctx);
  else if (k == "level-stats") run_level_stats(ctx);
  else if (k == "rankone-verify") run_rankone(ctx);
  else if (k == "krein-verify") run_krein(ctx);
  else if (k == "geometric-identity") run_geometric(ctx);
  else fail("unknown experiment kind '" + k + "'");

  bool all = true;
  for (const auto& [name, ok] : ctx.audits.items()) all = all && ok.get<bool>();
  json summary = {{"kind", k},
                  {"artifact_version", kArtifactVersion},
                  {"config_hash", config_hash(config)},
                  {"seed", config.run.seed},
                  {"results", ctx.results},
                  {"audits", ctx.audits},
                  {"all_audits_passed", all},
                  {"runtime_seconds",
                   std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()}};
  std::ofstream f(out / "summary.json");
  f << summary.dump(2) << '\n';
  return summary;
}

}  // namespace alab::cli
