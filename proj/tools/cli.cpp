#include "cli.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include <CLI11.hpp>

#include "seqalloc/error.hpp"
#include "seqalloc/split.hpp"

namespace seqalloc::cli {

using nlohmann::json;

namespace {

const char* unit_name(RateUnit u) { return u == RateUnit::kBits ? "bits" : "nats"; }

RateUnit parse_unit(const json& j) {
  const auto s = j.get<std::string>();
  if (s == "bits") return RateUnit::kBits;
  if (s == "nats") return RateUnit::kNats;
  throw InputError("units must be \"bits\" or \"nats\"");
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw InputError(path + ": " + e.what());
  }
}

void write_output(const std::string& path, const json& j, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << dump(j) << '\n';
    return;
  }
  std::ofstream f(path);
  if (!f) throw InputError("cannot write " + path);
  f << dump(j) << '\n';
  if (!f) throw InputError("write failed for " + path);
}

template <typename T>
T require(const json& j, const char* key) {
  if (!j.contains(key)) throw InputError(std::string("missing key \"") + key + "\"");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw InputError(std::string("key \"") + key + "\" has the wrong type");
  }
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json region_json(const verify::RegionCheckReport& rep) {
  json j;
  j["checked"] = rep.checked;
  j["worst_slack"] = rep.worst_slack;
  j["violating_subset"] = rep.violating_subset ? json(*rep.violating_subset) : json(nullptr);
  j["exhaustive"] = rep.exhaustive;
  return j;
}

verify::SubsetPolicy make_policy(bool exhaustive, std::uint64_t seed,
                                 std::vector<std::size_t> order) {
  verify::SubsetPolicy policy;
  policy.force_exhaustive = exhaustive;
  policy.seed = seed;
  policy.decode_order = std::move(order);
  return policy;
}

// ---------------------------------------------------------------------------
// Subcommands

struct DesignArgs {
  std::string input;
  std::string output;
  std::string order = "identity";
  double tol_fill = 1e-12;
  double tol_cluster = 1e-9;
  bool peel = false;
  bool exhaustive = false;
  std::uint64_t seed = 0x5eed;
};

int cmd_design(const DesignArgs& a, std::ostream& out, std::ostream& err) {
  const InstanceFile input = read_instance(a.input);
  const alloc::ProblemInstance inst = input.to_instance();
  const auto order = parse_order(a.order, inst.K());

  Tolerances tol;
  tol.tol_fill = a.tol_fill;
  tol.tol_cluster = a.tol_cluster;
  alloc::Options options;
  options.tol_fill = tol.tol_fill;
  options.tol_cluster = tol.tol_cluster;
  options.tol_match = tol.tol_match;

  alloc::Result result;
  try {
    if (a.peel) {
      result = alloc::allocate_with_oversized(inst, order, options);
    } else if (inst.mode == alloc::Mode::kRateConstrained) {
      result = alloc::allocate_min_power(inst, order, options);
    } else {
      result = alloc::allocate_max_rate(inst, order, options);
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kOversizedUser) {
      err << "refused: " << e.what() << " (rerun with --peel-oversized)\n";
      return kExitOversized;
    }
    throw;
  }

  const auto& al = result.allocation;
  const auto region = verify::region_membership(
      al.S, al.p, al.r, make_policy(a.exhaustive, a.seed, al.order), tol.region_tol);
  write_output(a.output, to_json(build_result(input, result, region, tol)), out);
  if (!region.passed()) {
    err << "verification failed: worst slack " << region.worst_slack << " nats\n";
    return kExitVerification;
  }
  return kExitOk;
}

int cmd_split(const std::string& input_path, const std::string& output, std::ostream& out) {
  const InstanceFile input = read_instance(input_path);
  const alloc::ProblemInstance inst = input.to_instance();
  const auto plan = split::make_partition(inst.demands, inst.N);
  const auto demands = plan.virtual_demands();
  const bool rates = inst.mode == alloc::Mode::kRateConstrained;
  const auto oa = rates ? split::allocate_orthogonal(plan, demands)
                        : split::orthogonal_capacity_allocation(plan, demands);

  json j;
  j["mode"] = rates ? "rates" : "powers";
  j["N"] = inst.N;
  j["K"] = inst.K();
  j["K_prime"] = plan.K_prime();
  j["units"] = unit_name(input.units);
  json splits = json::array();
  for (const auto& s : plan.splits) {
    std::vector<double> parts = s.parts;
    if (rates) {
      for (double& v : parts) v = from_nats(v, input.units);
    }
    splits.push_back({{"user", s.user}, {"parts", parts}});
  }
  j["splits"] = splits;

  json vusers = json::array();
  for (std::size_t v = 0; v < plan.K_prime(); ++v) {
    const auto& vu = plan.virtual_users[v];
    vusers.push_back({{"original", vu.original},
                      {"demand", rates ? from_nats(vu.demand, input.units) : vu.demand},
                      {"subset", vu.subset},
                      {"sequence_index", oa.sequence_index[v]},
                      {"power", oa.powers[v]},
                      {"rate", from_nats(oa.rates[v], input.units)}});
  }
  j["virtual_users"] = vusers;

  json subsets = json::array();
  double total_power = 0.0;
  double total_rate = 0.0;
  for (std::size_t n = 0; n < plan.subsets.size(); ++n) {
    double ps = 0.0;
    double rs = 0.0;
    for (std::size_t v : plan.subsets[n]) {
      ps += oa.powers[v];
      rs += oa.rates[v];
    }
    total_power += ps;
    total_rate += rs;
    subsets.push_back({{"members", plan.subsets[n]},
                       {"decode_order", oa.decode_order[n]},
                       {"power_sum", ps},
                       {"rate_sum", from_nats(rs, input.units)}});
  }
  j["subsets"] = subsets;
  j["total_power"] = total_power;
  j["total_rate"] = from_nats(total_rate, input.units);
  const double x_tot = inst.total();
  j["optimum"] = rates ? std::expm1(2.0 * x_tot) : from_nats(0.5 * std::log1p(x_tot), input.units);
  write_output(output, j, out);
  return kExitOk;
}

int cmd_verify(const std::string& path, bool exhaustive, std::uint64_t seed, std::ostream& out,
               std::ostream& err) {
  const ResultFile res = read_result(path);
  const linalg::Matrix S = res.sequence_matrix();
  const auto r = res.rates_nats();
  verify::RegionCheckReport rep;
  try {
    rep = verify::region_membership(S, res.p, r, make_policy(exhaustive, seed, res.order),
                                    res.tolerances.region_tol);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kNonUnitSequence) {
      err << "verification failed: " << e.what() << '\n';
      return kExitVerification;
    }
    throw InputError(e.what());
  }
  json j = region_json(rep);
  j["passed"] = rep.passed();
  out << dump(j) << '\n';
  if (!rep.passed()) {
    err << "verification failed: violating subset " << json(*rep.violating_subset).dump()
        << " with slack " << rep.worst_slack << " nats\n";
    return kExitVerification;
  }
  return kExitOk;
}

int cmd_demo(long long n, std::ostream& out, std::ostream& err) {
  if (n < 2) {
    err << "demo-necessity requires N >= 2\n";
    return kExitIoOrSchema;
  }
  const auto rep = verify::necessity_demo(static_cast<std::size_t>(n));
  json j;
  j["N"] = rep.N;
  j["K"] = rep.K;
  j["p_tot"] = rep.p_tot;
  j["lambda1_pair"] = rep.lambda1_pair;
  j["lambda1_pair_formula"] = rep.lambda1_pair_formula;
  j["lambda1_final"] = rep.lambda1_final;
  j["mean_eigenvalue"] = rep.mean_eigenvalue;
  j["sum_rate"] = rep.sum_rate;
  j["sum_capacity"] = rep.sum_capacity;
  j["rate_gap"] = rep.rate_gap;
  j["r_tot"] = rep.r_tot;
  j["lambda1_pair_rate"] = rep.lambda1_pair_rate;
  j["lambda_max_rate"] = rep.lambda_max_rate;
  j["power_used"] = rep.power_used;
  j["power_minimum"] = rep.power_minimum;
  j["power_gap"] = rep.power_gap;
  j["rate_reproduction_error"] = rep.rate_reproduction_error;
  j["note"] = rep.note;
  std::ostringstream summary;
  summary << "lambda_1(A_2) = " << rep.lambda1_pair << " > 1 + p_tot = " << 1.0 + rep.p_tot
          << "; sum-rate gap " << rep.rate_gap << " nats; sum-power gap " << rep.power_gap;
  j["summary"] = summary.str();
  out << dump(j) << '\n';
  return kExitOk;
}

}  // namespace

// ---------------------------------------------------------------------------
// Units and file formats

double to_nats(double rate, RateUnit unit) {
  return unit == RateUnit::kBits ? rate * std::numbers::ln2 : rate;
}

double from_nats(double rate, RateUnit unit) {
  return unit == RateUnit::kBits ? rate / std::numbers::ln2 : rate;
}

alloc::ProblemInstance InstanceFile::to_instance() const {
  alloc::ProblemInstance inst;
  inst.N = N;
  inst.mode = mode;
  inst.demands = demands;
  if (mode == alloc::Mode::kRateConstrained) {
    for (double& d : inst.demands) d = to_nats(d, units);
  }
  return inst;
}

InstanceFile parse_instance(const json& j) {
  if (!j.is_object()) throw InputError("instance must be a JSON object");
  InstanceFile f;
  const auto mode = require<std::string>(j, "mode");
  if (mode == "rates") {
    f.mode = alloc::Mode::kRateConstrained;
  } else if (mode == "powers") {
    f.mode = alloc::Mode::kPowerConstrained;
  } else {
    throw InputError("mode must be \"rates\" or \"powers\"");
  }
  if (!j.contains("N") || !j["N"].is_number_integer() || j["N"].get<long long>() < 1) {
    throw InputError("N must be a positive integer");
  }
  f.N = j["N"].get<std::size_t>();
  if (!j.contains("demands") || !j["demands"].is_array() || j["demands"].empty()) {
    throw InputError("demands must be a non-empty array");
  }
  for (const auto& d : j["demands"]) {
    if (!d.is_number()) throw InputError("demands must be numbers");
    const double v = d.get<double>();
    if (!std::isfinite(v) || !(v > 0.0)) throw InputError("demands must be positive");
    f.demands.push_back(v);
  }
  if (j.contains("units")) f.units = parse_unit(j["units"]);
  return f;
}

InstanceFile read_instance(const std::string& path) { return parse_instance(read_json_file(path)); }

linalg::Matrix ResultFile::sequence_matrix() const {
  const std::size_t k = p.size();
  if (S.size() != N) throw InputError("S must have N rows");
  linalg::Matrix m(N, k);
  for (std::size_t i = 0; i < N; ++i) {
    if (S[i].size() != k) throw InputError("every row of S must have K entries");
    for (std::size_t c = 0; c < k; ++c) m(i, c) = S[i][c];
  }
  return m;
}

std::vector<double> ResultFile::rates_nats() const {
  std::vector<double> out(r);
  for (double& v : out) v = to_nats(v, units);
  return out;
}

json to_json(const ResultFile& res) {
  json j;
  j["mode"] = res.mode;
  j["N"] = res.N;
  j["K"] = res.p.size();
  j["units"] = unit_name(res.units);
  j["S"] = res.S;
  j["p"] = res.p;
  j["r"] = res.r;
  j["distinct_count"] = res.distinct_count;
  j["order"] = res.order;
  j["private_users"] = res.private_users;
  j["lambda_max"] = res.lambda_max;
  json trace = json::array();
  for (const auto& t : res.trace) {
    trace.push_back({{"user", t.user},
                     {"case", t.step},
                     {"lambda", t.lambda},
                     {"c", t.c},
                     {"assigned", t.assigned},
                     {"alpha", optional_number(t.alpha)},
                     {"beta", optional_number(t.beta)}});
  }
  j["trace"] = trace;
  j["verification"] = {
      {"checked", res.verification.checked},
      {"worst_slack", res.verification.worst_slack},
      {"violating_subset", res.verification.violating_subset
                               ? json(*res.verification.violating_subset)
                               : json(nullptr)},
      {"exhaustive", res.verification.exhaustive}};
  j["tolerances"] = {{"tol_fill", res.tolerances.tol_fill},
                     {"tol_cluster", res.tolerances.tol_cluster},
                     {"tol_match", res.tolerances.tol_match},
                     {"region_tol", res.tolerances.region_tol}};
  return j;
}

ResultFile result_from_json(const json& j) {
  if (!j.is_object()) throw InputError("result must be a JSON object");
  ResultFile res;
  res.mode = require<std::string>(j, "mode");
  if (res.mode != "rates" && res.mode != "powers") {
    throw InputError("mode must be \"rates\" or \"powers\"");
  }
  res.N = require<std::size_t>(j, "N");
  res.units = j.contains("units") ? parse_unit(j["units"]) : RateUnit::kBits;
  res.S = require<std::vector<std::vector<double>>>(j, "S");
  res.p = require<std::vector<double>>(j, "p");
  res.r = require<std::vector<double>>(j, "r");
  if (res.r.size() != res.p.size()) throw InputError("p and r must have the same length");
  res.distinct_count = require<std::size_t>(j, "distinct_count");
  res.order = j.contains("order") ? require<std::vector<std::size_t>>(j, "order")
                                  : alloc::identity_order(res.p.size());
  if (j.contains("private_users")) {
    res.private_users = require<std::vector<std::size_t>>(j, "private_users");
  }
  if (j.contains("lambda_max")) res.lambda_max = require<double>(j, "lambda_max");
  if (j.contains("trace")) {
    for (const auto& t : j["trace"]) {
      StepRecordOut s;
      s.user = require<std::size_t>(t, "user");
      s.step = require<std::string>(t, "case");
      s.lambda = require<std::vector<double>>(t, "lambda");
      s.c = require<std::vector<double>>(t, "c");
      s.assigned = require<double>(t, "assigned");
      if (t.contains("alpha") && !t["alpha"].is_null()) s.alpha = t["alpha"].get<double>();
      if (t.contains("beta") && !t["beta"].is_null()) s.beta = t["beta"].get<double>();
      res.trace.push_back(std::move(s));
    }
  }
  if (j.contains("verification")) {
    const auto& v = j["verification"];
    res.verification.checked = require<std::size_t>(v, "checked");
    res.verification.worst_slack = require<double>(v, "worst_slack");
    if (v.contains("violating_subset") && !v["violating_subset"].is_null()) {
      res.verification.violating_subset = v["violating_subset"].get<std::vector<std::size_t>>();
    }
    if (v.contains("exhaustive")) res.verification.exhaustive = v["exhaustive"].get<bool>();
  }
  if (j.contains("tolerances")) {
    const auto& t = j["tolerances"];
    res.tolerances.tol_fill = t.value("tol_fill", res.tolerances.tol_fill);
    res.tolerances.tol_cluster = t.value("tol_cluster", res.tolerances.tol_cluster);
    res.tolerances.tol_match = t.value("tol_match", res.tolerances.tol_match);
    res.tolerances.region_tol = t.value("region_tol", res.tolerances.region_tol);
  }
  return res;
}

ResultFile read_result(const std::string& path) {
  return result_from_json(read_json_file(path));
}

std::string dump(const json& j) { return j.dump(2); }

std::vector<std::size_t> parse_order(const std::string& text, std::size_t k) {
  if (text == "identity") return alloc::identity_order(k);
  if (text == "reverse") return alloc::reverse_order(k);
  if (text.rfind("random:", 0) == 0) {
    const std::string seed = text.substr(7);
    try {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(seed, &used);
      if (used != seed.size()) throw std::invalid_argument(seed);
      return alloc::random_order(k, v);
    } catch (const std::exception&) {
      throw InputError("bad seed in --order " + text);
    }
  }
  throw InputError("--order must be identity, reverse or random:SEED");
}

ResultFile build_result(const InstanceFile& input, const alloc::Result& result,
                        const verify::RegionCheckReport& region, const Tolerances& tol) {
  const auto& al = result.allocation;
  const bool rates = input.mode == alloc::Mode::kRateConstrained;
  ResultFile res;
  res.mode = rates ? "rates" : "powers";
  res.N = input.N;
  res.units = input.units;
  res.S.assign(al.S.rows(), std::vector<double>(al.S.cols()));
  for (std::size_t i = 0; i < al.S.rows(); ++i) {
    for (std::size_t c = 0; c < al.S.cols(); ++c) res.S[i][c] = al.S(i, c);
  }
  res.p = al.p;
  res.r = al.r;
  for (double& v : res.r) v = from_nats(v, input.units);
  res.distinct_count = al.distinct_count;
  res.order = al.order;
  res.private_users = al.private_users;
  res.lambda_max = al.lambda_max;
  for (const auto& step : result.trace) {
    StepRecordOut s;
    s.user = step.user;
    s.step = alloc::to_string(step.step);
    s.lambda.assign(step.lambda.values().begin(), step.lambda.values().end());
    s.c = step.c;
    s.assigned = rates ? step.assigned : from_nats(step.assigned, input.units);
    if (!std::isnan(step.alpha)) s.alpha = step.alpha;
    if (!std::isnan(step.beta)) s.beta = step.beta;
    res.trace.push_back(std::move(s));
  }
  res.verification.checked = region.checked;
  res.verification.worst_slack = region.worst_slack;
  res.verification.violating_subset = region.violating_subset;
  res.verification.exhaustive = region.exhaustive;
  res.tolerances = tol;
  return res;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spreading-sequence and power/rate allocation for synchronous CDMA", "seqalloc"};
  app.require_subcommand(1);

  DesignArgs design;
  auto* design_cmd = app.add_subcommand("design", "Allocate sequences, powers and rates");
  design_cmd->add_option("input", design.input, "Instance file (JSON)")->required();
  design_cmd->add_option("-o,--output", design.output, "Result file (default: stdout)");
  design_cmd->add_option("--order", design.order, "identity | reverse | random:SEED");
  design_cmd->add_option("--tol-fill", design.tol_fill, "Relative band for a full dimension");
  design_cmd->add_option("--tol-cluster", design.tol_cluster, "Relative eigenvalue clustering tolerance");
  design_cmd->add_flag("--peel-oversized", design.peel, "Give oversized users private dimensions");
  design_cmd->add_flag("--exhaustive", design.exhaustive, "Check every user subset");
  design_cmd->add_option("--seed", design.seed, "Seed for sampled subset checks");

  std::string split_input;
  std::string split_output;
  auto* split_cmd = app.add_subcommand("split", "Split users onto N orthogonal sequences");
  split_cmd->add_option("input", split_input, "Instance file (JSON)")->required();
  split_cmd->add_option("-o,--output", split_output, "Report file (default: stdout)");

  std::string verify_input;
  bool verify_exhaustive = false;
  std::uint64_t verify_seed = 0x5eed;
  auto* verify_cmd = app.add_subcommand("verify", "Check a result file against the capacity region");
  verify_cmd->add_option("result", verify_input, "Result file (JSON)")->required();
  verify_cmd->add_flag("--exhaustive", verify_exhaustive, "Check every user subset");
  verify_cmd->add_option("--seed", verify_seed, "Seed for sampled subset checks");

  long long demo_n = 0;
  auto* demo_cmd = app.add_subcommand("demo-necessity", "Show that 2N-2 sequences fall short");
  demo_cmd->add_option("--N", demo_n, "Processing gain (>= 2)")->required();

  std::vector<const char*> argv;
  argv.push_back("seqalloc");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitIoOrSchema;
  }

  try {
    if (*design_cmd) return cmd_design(design, out, err);
    if (*split_cmd) return cmd_split(split_input, split_output, out);
    if (*verify_cmd) return cmd_verify(verify_input, verify_exhaustive, verify_seed, out, err);
    if (*demo_cmd) return cmd_demo(demo_n, out, err);
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIoOrSchema;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitIoOrSchema;
  }
  return kExitIoOrSchema;
}

}  // namespace seqalloc::cli
