#include "rlasso/io.hpp"

#include <openssl/evp.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <iostream>
#include <sstream>

namespace rlasso {

namespace {

std::uint64_t to_little(std::uint64_t bits) {
  if constexpr (std::endian::native == std::endian::big) {
    std::uint64_t out = 0;
    for (int i = 0; i < 8; ++i) out |= ((bits >> (8 * i)) & 0xffu) << (8 * (7 - i));
    return out;
  }
  return bits;
}

const Json& field(const Json& node, const char* key, const char* where) {
  if (!node.is_object() || !node.contains(key)) {
    throw ParseError(std::string(where) + ": missing field '" + key + "'");
  }
  return node.at(key);
}

template <class T>
T get(const Json& node, const char* key, const char* where) {
  try {
    return field(node, key, where).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string(where) + ": field '" + key + "' has the wrong type");
  }
}

std::vector<double> to_doubles(const Real* data, Index count) {
  std::vector<double> out(static_cast<std::size_t>(count));
  for (Index i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = static_cast<double>(data[i]);
  return out;
}

std::vector<double> read_array(const Json& node, const char* name, std::vector<Index>& shape) {
  if (!node.is_object()) throw ParseError(std::string(name) + ": array must be an object");
  if (get<std::string>(node, "dtype", name) != "f64le") {
    throw ParseError(std::string(name) + ": dtype must be f64le");
  }
  if (node.contains("order") && node.at("order") != "column-major") {
    throw ParseError(std::string(name) + ": order must be column-major");
  }
  shape = get<std::vector<Index>>(node, "shape", name);
  std::vector<double> values = decode_f64(get<std::string>(node, "data", name));
  Index expected = 1;
  for (Index d : shape) {
    if (d < 0) throw ParseError(std::string(name) + ": negative extent");
    expected *= d;
  }
  if (static_cast<Index>(values.size()) != expected) {
    throw ParseError(std::string(name) + ": data length does not match shape");
  }
  return values;
}

Json covariance_to_json(const CovarianceSpec& spec) {
  Json out = {{"kind", to_string(spec.kind)}, {"p", spec.p}};
  if (spec.kind == CovarianceSpec::Kind::ar1) out["rho"] = static_cast<double>(spec.rho);
  if (spec.kind == CovarianceSpec::Kind::explicit_matrix) out["sigma"] = array_to_json(spec.sigma);
  return out;
}

CovarianceSpec covariance_from_json(const Json& node) {
  const auto kind = covariance_kind_from_string(get<std::string>(node, "kind", "covariance"));
  const Index p = get<Index>(node, "p", "covariance");
  switch (kind) {
    case CovarianceSpec::Kind::identity: return CovarianceSpec::identity(p);
    case CovarianceSpec::Kind::ar1: return CovarianceSpec::ar1(p, get<double>(node, "rho", "covariance"));
    case CovarianceSpec::Kind::explicit_matrix:
      return CovarianceSpec::from_matrix(matrix_from_json(field(node, "sigma", "covariance"), "covariance.sigma"));
  }
  throw ParseError("covariance: unreachable kind");
}

void check_schema(const Json& doc, const char* schema, int version) {
  if (!doc.is_object()) throw ParseError(std::string(schema) + ": document must be a JSON object");
  if (get<std::string>(doc, "schema", schema) != schema) {
    throw ParseError(std::string("expected a document with schema '") + schema + "'");
  }
  if (get<int>(doc, "schema_version", schema) != version) {
    throw ParseError(std::string(schema) + ": unsupported schema_version");
  }
}

}  // namespace

std::string encode_f64(const std::vector<double>& values) {
  std::string bytes(values.size() * 8, '\0');
  for (std::size_t i = 0; i < values.size(); ++i) {
    const std::uint64_t bits = to_little(std::bit_cast<std::uint64_t>(values[i]));
    std::memcpy(bytes.data() + 8 * i, &bits, 8);
  }
  std::string out(4 * ((bytes.size() + 2) / 3) + 1, '\0');
  const int len = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                  reinterpret_cast<const unsigned char*>(bytes.data()),
                                  static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(len));
  return out;
}

std::vector<double> decode_f64(const std::string& text) {
  if (text.size() % 4 != 0) throw ParseError("base64 payload length is not a multiple of 4");
  std::string bytes(3 * (text.size() / 4) + 1, '\0');
  const int len = EVP_DecodeBlock(reinterpret_cast<unsigned char*>(bytes.data()),
                                  reinterpret_cast<const unsigned char*>(text.data()),
                                  static_cast<int>(text.size()));
  if (len < 0) throw ParseError("invalid base64 payload");
  std::size_t size = static_cast<std::size_t>(len);
  // EVP_DecodeBlock counts padding as zero bytes.
  if (!text.empty() && text.back() == '=') --size;
  if (text.size() > 1 && text[text.size() - 2] == '=') --size;
  if (size % 8 != 0) throw ParseError("base64 payload is not a whole number of f64 values");
  std::vector<double> out(size / 8);
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::uint64_t bits;
    std::memcpy(&bits, bytes.data() + 8 * i, 8);
    out[i] = std::bit_cast<double>(to_little(bits));
  }
  return out;
}

Json array_to_json(const Vector& v) {
  return {{"dtype", "f64le"},
          {"shape", {v.size()}},
          {"order", "column-major"},
          {"data", encode_f64(to_doubles(v.data(), v.size()))}};
}

Json array_to_json(const Matrix& m) {
  return {{"dtype", "f64le"},
          {"shape", {m.rows(), m.cols()}},
          {"order", "column-major"},
          {"data", encode_f64(to_doubles(m.data(), m.size()))}};
}

Vector vector_from_json(const Json& node, const char* name) {
  std::vector<Index> shape;
  const std::vector<double> values = read_array(node, name, shape);
  if (shape.size() != 1) throw ParseError(std::string(name) + ": expected a 1-d array");
  Vector out(shape[0]);
  for (Index i = 0; i < out.size(); ++i) out(i) = values[static_cast<std::size_t>(i)];
  return out;
}

Matrix matrix_from_json(const Json& node, const char* name) {
  std::vector<Index> shape;
  const std::vector<double> values = read_array(node, name, shape);
  if (shape.size() != 2) throw ParseError(std::string(name) + ": expected a 2-d array");
  Matrix out(shape[0], shape[1]);
  for (Index i = 0; i < out.size(); ++i) out.data()[i] = values[static_cast<std::size_t>(i)];
  return out;
}

Json instance_to_json(const ProblemInstance& instance) {
  const GenerationMeta& meta = instance.meta();
  Json header = {{"n", instance.n()},
                 {"p", instance.p()},
                 {"k", nullptr},
                 {"s", nullptr},
                 {"sigma", nullptr},
                 {"seed", meta.seed},
                 {"covariance", covariance_to_json(meta.covariance)},
                 {"regime", meta.regime ? Json(to_string(*meta.regime)) : Json(nullptr)},
                 {"corruption", to_string(meta.corruption)},
                 {"gross_scale", static_cast<double>(meta.gross_scale)},
                 {"beta_floor", static_cast<double>(meta.beta_floor)},
                 {"e_floor", static_cast<double>(meta.e_floor)}};
  Json doc = {{"schema", "rlasso.instance"},
              {"schema_version", kInstanceSchemaVersion},
              {"header", header},
              {"X", array_to_json(instance.X())},
              {"y", array_to_json(instance.y())},
              {"truth", nullptr}};
  if (const auto& truth = instance.truth()) {
    doc["header"]["k"] = truth->k();
    doc["header"]["s"] = truth->s();
    doc["header"]["sigma"] = static_cast<double>(truth->sigma);
    doc["truth"] = {{"beta_star", array_to_json(truth->beta_star)},
                    {"e_star", array_to_json(truth->e_star)},
                    {"w", array_to_json(truth->w)}};
  }
  return doc;
}

ProblemInstance instance_from_json(const Json& doc) {
  check_schema(doc, "rlasso.instance", kInstanceSchemaVersion);
  const Json& header = field(doc, "header", "instance");
  GenerationMeta meta;
  meta.seed = get<std::uint64_t>(header, "seed", "header");
  meta.covariance = covariance_from_json(field(header, "covariance", "header"));
  if (header.contains("regime") && !header.at("regime").is_null()) {
    meta.regime = sparsity_regime_from_string(get<std::string>(header, "regime", "header"));
  }
  meta.corruption = corruption_mode_from_string(get<std::string>(header, "corruption", "header"));
  meta.gross_scale = get<double>(header, "gross_scale", "header");
  meta.beta_floor = get<double>(header, "beta_floor", "header");
  meta.e_floor = get<double>(header, "e_floor", "header");

  Matrix X = matrix_from_json(field(doc, "X", "instance"), "X");
  Vector y = vector_from_json(field(doc, "y", "instance"), "y");
  if (get<Index>(header, "n", "header") != X.rows() || get<Index>(header, "p", "header") != X.cols()) {
    throw ParseError("instance: header (n, p) disagrees with the shape of X");
  }
  std::optional<GroundTruth> truth;
  const Json& t = field(doc, "truth", "instance");
  if (!t.is_null()) {
    truth = GroundTruth::from_vectors(vector_from_json(field(t, "beta_star", "truth"), "beta_star"),
                                      vector_from_json(field(t, "e_star", "truth"), "e_star"),
                                      vector_from_json(field(t, "w", "truth"), "w"),
                                      get<double>(header, "sigma", "header"));
    if (get<Index>(header, "k", "header") != truth->k() || get<Index>(header, "s", "header") != truth->s()) {
      throw ParseError("instance: header (k, s) disagrees with the truth supports");
    }
  }
  return ProblemInstance(std::move(X), std::move(y), std::move(truth), std::move(meta));
}

Json solution_to_json(const Solution& solution) {
  Json trace = Json::array();
  for (const TraceEntry& t : solution.trace) {
    trace.push_back({{"lambda_scale", static_cast<double>(t.lambda_scale)},
                     {"iterations", t.iterations},
                     {"objective", static_cast<double>(t.objective)},
                     {"kkt_residual", static_cast<double>(t.kkt_residual)}});
  }
  return {{"schema", "rlasso.solution"},
          {"schema_version", kSolutionSchemaVersion},
          {"beta_hat", array_to_json(solution.beta_hat)},
          {"e_hat", array_to_json(solution.e_hat)},
          {"lambda_beta", static_cast<double>(solution.lambda_beta)},
          {"lambda_e", static_cast<double>(solution.lambda_e)},
          {"objective", static_cast<double>(solution.objective)},
          {"iterations", solution.iterations},
          {"converged", solution.converged},
          {"kkt_residual", static_cast<double>(solution.kkt_residual)},
          {"algorithm", solution.algorithm},
          {"trace", trace}};
}

Solution solution_from_json(const Json& doc) {
  check_schema(doc, "rlasso.solution", kSolutionSchemaVersion);
  Solution s;
  s.beta_hat = vector_from_json(field(doc, "beta_hat", "solution"), "beta_hat");
  s.e_hat = vector_from_json(field(doc, "e_hat", "solution"), "e_hat");
  s.lambda_beta = get<double>(doc, "lambda_beta", "solution");
  s.lambda_e = get<double>(doc, "lambda_e", "solution");
  s.objective = get<double>(doc, "objective", "solution");
  s.iterations = get<std::size_t>(doc, "iterations", "solution");
  s.converged = get<bool>(doc, "converged", "solution");
  s.kkt_residual = get<double>(doc, "kkt_residual", "solution");
  s.algorithm = get<std::string>(doc, "algorithm", "solution");
  if (doc.contains("trace")) {
    for (const Json& t : doc.at("trace")) {
      s.trace.push_back({get<double>(t, "lambda_scale", "trace"), get<std::size_t>(t, "iterations", "trace"),
                         get<double>(t, "objective", "trace"), get<double>(t, "kkt_residual", "trace")});
    }
  }
  return s;
}

Json read_json(const std::string& path) {
  std::stringstream buffer;
  if (path == "-") {
    buffer << std::cin.rdbuf();
  } else {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'");
    buffer << in.rdbuf();
  }
  try {
    return Json::parse(buffer.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("'" + path + "' is not valid JSON: " + e.what());
  }
}

void write_json(const Json& doc, const std::string& path) {
  if (path == "-") {
    std::cout << doc.dump(2) << '\n';
    std::cout.flush();
    return;
  }
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << doc.dump(2) << '\n';
  if (!out) throw InputError("failed writing '" + path + "'");
}

}  // namespace rlasso
