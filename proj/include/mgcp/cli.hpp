#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mgcp/errors.hpp"
#include "mgcp/orchestrator.hpp"

namespace mgcp::cli {

// Unreadable or unwritable file.
class IoError : public Error {
 public:
  using Error::Error;
};

inline constexpr int kModelFormatVersion = 1;
inline constexpr int kReportFormatVersion = 1;

// Exit codes of the command-line tool.
enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2, kNumericalError = 3 };

/// Long-format CSV with header `output_id,x1[,x2,...],y`. Outputs are returned in ascending id order.
/// Throws ParseError carrying the 1-based line number of the offending row.
Dataset parse_dataset_csv(std::istream& in);
void write_dataset_csv(std::ostream& out, const Dataset& data);

// Test inputs with header `x1[,x2,...]`; a header-only file gives a 0-row matrix.
Matrix parse_inputs_csv(std::istream& in);
void write_predictions_csv(std::ostream& out, const Matrix& X, const std::vector<GaussianPrediction>& preds);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

/// Everything needed to predict from a fitted set of pairwise submodels.
struct Model {
  Dataset data;  // original responses; standardized again on load when `standardized` is set
  bool standardized = false;
  std::optional<int> target_id;
  PenaltyConfig penalty;
  LayoutOptions layout;
  std::optional<CvConfig> cv;
  OptimizerConfig optimizer;
  std::vector<PairFit> fits;  // pair members are 0-based positions in `data`
  std::vector<std::string> warnings;
};

std::string model_to_json(const Model& model);
// Throws ParseError on malformed or unsupported files.
Model model_from_json(const std::string& text);

// PoE predictions for output `target_id`, on the original response scale.
std::vector<GaussianPrediction> predict_model(const Model& model, int target_id, const Matrix& X);

struct BenchmarkConfig {
  int setting = 1;
  std::vector<std::string> methods{"gcp", "mgcp", "mgcp-rd"};
  int replicates = 2;
  std::uint64_t seed = 0;
  // Generator overrides; 0 or negative keeps the setting's default.
  int outputs = 0;
  Index points = 0;
  double sigma = -1.0;
  Index test_points = 50;
  PenaltyConfig penalty{PenaltyKind::L1, 0.0};
  // Empty: no cross-validation, penalty.lambda is used as given.
  std::optional<CvConfig> cv = CvConfig{};
  OptimizerConfig optimizer;
  int cv_restarts = 1;
  int parallelism = 1;
  LayoutOptions layout;
  bool standardize = false;

  void validate() const;
};

struct MethodRuns {
  std::string name;
  std::vector<double> mae;
  std::vector<double> seconds;
};

struct PairSummary {
  int id_a = 0;
  int id_b = 0;
  bool ok = false;
  double lambda = 0.0;
  double xi0 = 0.0;
  bool xi0_zeroed = false;
};

struct ReplicateRecord {
  std::uint64_t seed = 0;
  int target_id = 0;
  Vector test_x;
  Vector truth;
  std::map<std::string, Vector> means;
  std::vector<PairSummary> pairs;  // MGCP-RD submodels, plan order
};

struct BenchmarkResult {
  BenchmarkConfig config;
  std::vector<MethodRuns> methods;  // config.methods order
  std::vector<ReplicateRecord> replicates;
};

// The target of each replicate is the last output; MAE is against the noise-free signal.
BenchmarkResult run_benchmark(const BenchmarkConfig& config);
std::string benchmark_to_json(const BenchmarkResult& result, bool include_timing);

// Markdown summary of a benchmark report file's contents.
std::string summarize_report(const std::string& report_json);

/// Entry point of the `mgcp` tool. args[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mgcp::cli
