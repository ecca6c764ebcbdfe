#pragma once

// Command-line front end and its JSON file formats.
//
//   seqalloc design INPUT [-o OUT] [--order identity|reverse|random:SEED]
//                   [--tol-fill X] [--tol-cluster X] [--peel-oversized]
//                   [--exhaustive] [--seed S]
//   seqalloc split INPUT [-o OUT]
//   seqalloc verify RESULT [--exhaustive] [--seed S]
//   seqalloc demo-necessity --N n
//
// Exit codes: 0 ok, 1 I/O or schema error, 2 oversized refusal,
// 3 verification failure.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "seqalloc/alloc.hpp"
#include "seqalloc/verify.hpp"

namespace seqalloc::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitIoOrSchema = 1;
inline constexpr int kExitOversized = 2;
inline constexpr int kExitVerification = 3;

enum class RateUnit { kBits, kNats };

double to_nats(double rate, RateUnit unit);
double from_nats(double rate, RateUnit unit);

/// Raised for unreadable files and schema violations.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct InstanceFile {
  alloc::Mode mode = alloc::Mode::kPowerConstrained;
  std::size_t N = 1;
  std::vector<double> demands;  // as written, in `units` for rates
  RateUnit units = RateUnit::kBits;

  /// Demands converted to nats when they are rates.
  alloc::ProblemInstance to_instance() const;
};

InstanceFile parse_instance(const nlohmann::json& j);
InstanceFile read_instance(const std::string& path);

struct StepRecordOut {
  std::size_t user = 0;
  std::string step;
  std::vector<double> lambda;
  std::vector<double> c;
  double assigned = 0.0;
  std::optional<double> alpha;
  std::optional<double> beta;
};

struct VerificationSummary {
  std::size_t checked = 0;
  double worst_slack = 0.0;  // nats/chip
  std::optional<std::vector<std::size_t>> violating_subset;
  bool exhaustive = false;
};

struct Tolerances {
  double tol_fill = 1e-12;
  double tol_cluster = 1e-9;
  double tol_match = 1e-9;
  double region_tol = 1e-9;
};

struct ResultFile {
  std::string mode;  // "rates" | "powers"
  std::size_t N = 0;
  RateUnit units = RateUnit::kBits;
  std::vector<std::vector<double>> S;  // N rows of K entries
  std::vector<double> p;
  std::vector<double> r;  // in `units`
  std::size_t distinct_count = 0;
  std::vector<std::size_t> order;
  std::vector<std::size_t> private_users;
  double lambda_max = 1.0;
  std::vector<StepRecordOut> trace;
  VerificationSummary verification;
  Tolerances tolerances;

  linalg::Matrix sequence_matrix() const;
  std::vector<double> rates_nats() const;
};

nlohmann::json to_json(const ResultFile& result);
ResultFile result_from_json(const nlohmann::json& j);
ResultFile read_result(const std::string& path);

/// Serialized form written by every subcommand.
std::string dump(const nlohmann::json& j);

std::vector<std::size_t> parse_order(const std::string& text, std::size_t k);

ResultFile build_result(const InstanceFile& input, const alloc::Result& result,
                        const verify::RegionCheckReport& region, const Tolerances& tol);

/// Entry point shared by the executable and the tests.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace seqalloc::cli
