#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "mgcp/cli.hpp"
#include "mgcp/simulate.hpp"

namespace mgcp::cli {

using nlohmann::json;

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_double(const std::string& field, long line) {
  double v = 0.0;
  const char* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, v);
  if (field.empty() || ec != std::errc() || ptr != end) throw ParseError("not a number: '" + field + "'", line);
  if (!std::isfinite(v)) throw ParseError("non-finite value: '" + field + "'", line);
  return v;
}

int parse_int(const std::string& field, long line) {
  int v = 0;
  const char* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, v);
  if (field.empty() || ec != std::errc() || ptr != end) throw ParseError("not an integer: '" + field + "'", line);
  return v;
}

// Validates `x1,...,xD` starting at `first`; returns D.
Index check_input_columns(const std::vector<std::string>& header, std::size_t first, std::size_t count) {
  if (count < 1) throw ParseError("header needs at least one input column x1", 1);
  for (std::size_t k = 0; k < count; ++k) {
    const std::string want = "x" + std::to_string(k + 1);
    if (header[first + k] != want) throw ParseError("expected column '" + want + "', got '" + header[first + k] + "'", 1);
  }
  return static_cast<Index>(count);
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

Dataset parse_dataset_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("missing header", 1);
  const std::vector<std::string> header = split(line);
  if (header.size() < 3 || header.front() != "output_id" || header.back() != "y") {
    throw ParseError("header must be output_id,x1[,x2,...],y", 1);
  }
  const Index dim = check_input_columns(header, 1, header.size() - 2);

  std::map<int, std::vector<std::vector<double>>> rows;
  long number = 1;
  while (std::getline(in, line)) {
    ++number;
    if (trim(line).empty()) continue;
    const std::vector<std::string> fields = split(line);
    if (fields.size() != header.size()) {
      throw ParseError("expected " + std::to_string(header.size()) + " fields, got " + std::to_string(fields.size()),
                       number);
    }
    const int id = parse_int(fields.front(), number);
    std::vector<double> values;
    for (std::size_t k = 1; k < fields.size(); ++k) values.push_back(parse_double(fields[k], number));
    rows[id].push_back(std::move(values));
  }

  Dataset data;
  for (const auto& [id, points] : rows) {
    OutputSeries s;
    s.id = id;
    s.X.resize(static_cast<Index>(points.size()), dim);
    s.y.resize(static_cast<Index>(points.size()));
    for (std::size_t r = 0; r < points.size(); ++r) {
      for (Index c = 0; c < dim; ++c) s.X(static_cast<Index>(r), c) = points[r][static_cast<std::size_t>(c)];
      s.y[static_cast<Index>(r)] = points[r].back();
    }
    data.outputs.push_back(std::move(s));
  }
  return data;
}

void write_dataset_csv(std::ostream& out, const Dataset& data) {
  const Index dim = std::max<Index>(data.input_dim(), 1);
  out << "output_id";
  for (Index c = 0; c < dim; ++c) out << ",x" << c + 1;
  out << ",y\n";
  for (const OutputSeries& s : data.outputs) {
    for (Index r = 0; r < s.size(); ++r) {
      out << s.id;
      for (Index c = 0; c < s.X.cols(); ++c) out << ',' << format_double(s.X(r, c));
      out << ',' << format_double(s.y[r]) << '\n';
    }
  }
}

Matrix parse_inputs_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("missing header", 1);
  const std::vector<std::string> header = split(line);
  const Index dim = check_input_columns(header, 0, header.size());
  std::vector<std::vector<double>> rows;
  long number = 1;
  while (std::getline(in, line)) {
    ++number;
    if (trim(line).empty()) continue;
    const std::vector<std::string> fields = split(line);
    if (fields.size() != header.size()) {
      throw ParseError("expected " + std::to_string(header.size()) + " fields, got " + std::to_string(fields.size()),
                       number);
    }
    std::vector<double> values;
    for (const std::string& f : fields) values.push_back(parse_double(f, number));
    rows.push_back(std::move(values));
  }
  Matrix X(static_cast<Index>(rows.size()), dim);
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (Index c = 0; c < dim; ++c) X(static_cast<Index>(r), c) = rows[r][static_cast<std::size_t>(c)];
  return X;
}

void write_predictions_csv(std::ostream& out, const Matrix& X, const std::vector<GaussianPrediction>& preds) {
  for (Index c = 0; c < X.cols(); ++c) out << (c ? "," : "") << 'x' << c + 1;
  out << ",mean,variance\n";
  for (Index r = 0; r < X.rows(); ++r) {
    for (Index c = 0; c < X.cols(); ++c) out << (c ? "," : "") << format_double(X(r, c));
    const GaussianPrediction& p = preds[static_cast<std::size_t>(r)];
    out << ',' << format_double(p.mean) << ',' << format_double(p.variance) << '\n';
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << content;
  out.flush();
  if (!out) throw IoError("failed writing '" + path + "'");
}

// Model file ----------------------------------------------------------------

namespace {

json vector_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Vector json_vector(const json& j) {
  const std::vector<double> v = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size()));
}

json kernel_json(const KernelSpec& k) {
  return {{"amplitude", k.amplitude}, {"lengthscale_diag", vector_json(k.lengthscale_diag)}};
}

KernelSpec json_kernel(const json& j) {
  return KernelSpec{j.at("amplitude").get<double>(), json_vector(j.at("lengthscale_diag"))};
}

json params_json(const BivariateParams& p) {
  return {{"xi0", p.xi0},
          {"xi_i", p.xi_i},
          {"xi_j", p.xi_j},
          {"sigma_i", p.sigma_i},
          {"sigma_j", p.sigma_j},
          {"k_0i", kernel_json(p.k_0i)},
          {"k_0j", kernel_json(p.k_0j)},
          {"k_ii", kernel_json(p.k_ii)},
          {"k_jj", kernel_json(p.k_jj)}};
}

BivariateParams json_params(const json& j) {
  BivariateParams p;
  p.xi0 = j.at("xi0").get<double>();
  p.xi_i = j.at("xi_i").get<double>();
  p.xi_j = j.at("xi_j").get<double>();
  p.sigma_i = j.at("sigma_i").get<double>();
  p.sigma_j = j.at("sigma_j").get<double>();
  p.k_0i = json_kernel(j.at("k_0i"));
  p.k_0j = json_kernel(j.at("k_0j"));
  p.k_ii = json_kernel(j.at("k_ii"));
  p.k_jj = json_kernel(j.at("k_jj"));
  p.validate();
  return p;
}

}  // namespace

std::string model_to_json(const Model& model) {
  json outputs = json::array();
  for (std::size_t k = 0; k < model.data.outputs.size(); ++k) {
    const OutputSeries& s = model.data.outputs[k];
    json X = json::array();
    for (Index r = 0; r < s.X.rows(); ++r) X.push_back(vector_json(s.X.row(r).transpose()));
    json o = {{"id", s.id}, {"X", X}, {"y", vector_json(s.y)}};
    if (model.standardized && k < model.data.standardization.size()) {
      o["mean"] = model.data.standardization[k].mean;
      o["std"] = model.data.standardization[k].std;
    }
    outputs.push_back(std::move(o));
  }

  json pairs = json::array();
  for (const PairFit& f : model.fits) {
    json p = {{"outputs", {model.data.outputs.at(static_cast<std::size_t>(f.pair.first)).id,
                           model.data.outputs.at(static_cast<std::size_t>(f.pair.second)).id}},
              {"ok", f.ok}};
    if (!f.ok) {
      p["error"] = f.error;
    } else {
      p["lambda"] = f.fit.lambda_used;
      p["objective"] = f.fit.objective;
      p["converged"] = f.fit.converged;
      p["xi0_zeroed"] = f.fit.xi0_zeroed;
      p["cv_scores"] = f.cv.scores;
      p["params"] = params_json(f.fit.params);
    }
    pairs.push_back(std::move(p));
  }

  json j = {{"format", "mgcp-rd-model"},
            {"version", kModelFormatVersion},
            {"input_dim", model.data.input_dim()},
            {"standardized", model.standardized},
            {"target", model.target_id ? json(*model.target_id) : json(nullptr)},
            {"penalty",
             {{"kind", to_string(model.penalty.kind)},
              {"gamma", model.penalty.gamma},
              {"bridge_exponent", model.penalty.bridge_exponent},
              {"scale_by_points", model.penalty.scale_by_points}}},
            {"layout",
             {{"tie_shared_kernels", model.layout.tie_shared_kernels},
              {"free_unique_scales", model.layout.free_unique_scales},
              {"balance_shared_amplitudes", model.layout.balance_shared_amplitudes}}},
            {"optimizer",
             {{"max_iters", model.optimizer.max_iters},
              {"grad_tol", model.optimizer.grad_tol},
              {"restarts", model.optimizer.restarts},
              {"seed", model.optimizer.seed}}},
            {"outputs", outputs},
            {"pairs", pairs},
            {"warnings", model.warnings}};
  if (model.cv) {
    j["cv"] = {{"folds", model.cv->folds},
               {"lambda_grid", model.cv->lambda_grid},
               {"seed", model.cv->seed},
               {"criterion", model.cv->criterion == CvCriterion::Mae ? "mae" : "mse"}};
  }
  return j.dump(2) + "\n";
}

Model model_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("model file is not valid JSON: ") + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != "mgcp-rd-model") throw ParseError("not an mgcp-rd model file");
    const int version = j.at("version").get<int>();
    if (version != kModelFormatVersion) throw ParseError("unsupported model version " + std::to_string(version));

    Model m;
    m.standardized = j.at("standardized").get<bool>();
    if (!j.at("target").is_null()) m.target_id = j.at("target").get<int>();
    const json& pen = j.at("penalty");
    m.penalty.kind = parse_penalty_kind(pen.at("kind").get<std::string>());
    m.penalty.gamma = pen.at("gamma").get<double>();
    m.penalty.bridge_exponent = pen.at("bridge_exponent").get<double>();
    m.penalty.scale_by_points = pen.at("scale_by_points").get<bool>();
    const json& lay = j.at("layout");
    m.layout.tie_shared_kernels = lay.at("tie_shared_kernels").get<bool>();
    m.layout.free_unique_scales = lay.at("free_unique_scales").get<bool>();
    m.layout.balance_shared_amplitudes = lay.at("balance_shared_amplitudes").get<bool>();
    const json& opt = j.at("optimizer");
    m.optimizer.max_iters = opt.at("max_iters").get<int>();
    m.optimizer.grad_tol = opt.at("grad_tol").get<double>();
    m.optimizer.restarts = opt.at("restarts").get<int>();
    m.optimizer.seed = opt.at("seed").get<std::uint64_t>();
    if (j.contains("cv")) {
      const json& cv = j.at("cv");
      CvConfig c;
      c.folds = cv.at("folds").get<int>();
      c.lambda_grid = cv.at("lambda_grid").get<std::vector<double>>();
      c.seed = cv.at("seed").get<std::uint64_t>();
      c.criterion = cv.at("criterion").get<std::string>() == "mse" ? CvCriterion::Mse : CvCriterion::Mae;
      m.cv = c;
    }

    const Index dim = j.at("input_dim").get<Index>();
    for (const json& o : j.at("outputs")) {
      OutputSeries s;
      s.id = o.at("id").get<int>();
      const json& X = o.at("X");
      s.X.resize(static_cast<Index>(X.size()), dim);
      for (std::size_t r = 0; r < X.size(); ++r) {
        const Vector row = json_vector(X[r]);
        if (row.size() != dim) throw ParseError("output " + std::to_string(s.id) + " has a row of wrong dimension");
        s.X.row(static_cast<Index>(r)) = row.transpose();
      }
      s.y = json_vector(o.at("y"));
      if (m.standardized) m.data.standardization.push_back({o.at("mean").get<double>(), o.at("std").get<double>()});
      m.data.outputs.push_back(std::move(s));
    }
    m.data.validate();

    for (const json& p : j.at("pairs")) {
      PairFit f;
      const std::vector<int> ids = p.at("outputs").get<std::vector<int>>();
      if (ids.size() != 2) throw ParseError("pair entry must name two outputs");
      f.pair = {m.data.index_of(ids[0]), m.data.index_of(ids[1])};
      f.ok = p.at("ok").get<bool>();
      if (!f.ok) {
        f.error = p.at("error").get<std::string>();
      } else {
        f.fit.lambda_used = p.at("lambda").get<double>();
        f.fit.objective = p.at("objective").get<double>();
        f.fit.converged = p.at("converged").get<bool>();
        f.fit.xi0_zeroed = p.at("xi0_zeroed").get<bool>();
        f.cv.scores = p.at("cv_scores").get<std::vector<double>>();
        f.cv.lambda = f.fit.lambda_used;
        f.fit.params = json_params(p.at("params"));
        if (f.fit.params.dim() != dim) throw ParseError("pair parameters have the wrong input dimension");
      }
      m.fits.push_back(std::move(f));
    }
    m.warnings = j.at("warnings").get<std::vector<std::string>>();
    return m;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed model file: ") + e.what());
  } catch (const ArgumentError& e) {
    throw ParseError(std::string("malformed model file: ") + e.what());
  }
}

std::vector<GaussianPrediction> predict_model(const Model& model, int target_id, const Matrix& X) {
  if (X.cols() != model.data.input_dim()) {
    throw ArgumentError("test inputs have " + std::to_string(X.cols()) + " columns, model expects " +
                        std::to_string(model.data.input_dim()));
  }
  const int target = model.data.index_of(target_id);
  const Dataset fitted = model.standardized ? standardize(model.data, true) : model.data;
  std::vector<GaussianPrediction> preds = predict_target(model.fits, fitted, target, X);
  if (model.standardized) {
    for (GaussianPrediction& p : preds) p = destandardize(p, fitted.standardization[static_cast<std::size_t>(target)]);
  }
  return preds;
}

}  // namespace mgcp::cli
