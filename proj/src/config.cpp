#include "roughmdp/config.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "roughmdp/io.hpp"

namespace roughmdp::mdp {

namespace {

using nlohmann::json;

void require_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ValidationError(where + " must be a JSON object");
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key))
      throw ValidationError("unknown key '" + key + "' in " + where);
}

Eigen::VectorXd parse_vector(const json& j, const std::string& where) {
  if (!j.is_array()) throw ValidationError(where + " must be an array of numbers");
  Eigen::VectorXd v(j.size());
  Eigen::Index i = 0;
  for (const auto& x : j) {
    if (!x.is_number()) throw ValidationError(where + " must contain numbers only");
    v[i++] = x.get<double>();
  }
  return v;
}

Eigen::MatrixXd parse_matrix(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) throw ValidationError(where + " must be a nonempty 2-d array");
  const std::size_t cols = j.front().is_array() ? j.front().size() : 0;
  Eigen::MatrixXd m(j.size(), cols);
  Eigen::Index r = 0;
  for (const auto& row : j) {
    if (!row.is_array() || row.size() != cols)
      throw ValidationError(where + " must be rectangular");
    Eigen::Index c = 0;
    for (const auto& x : row) m(r, c++) = x.get<double>();
    ++r;
  }
  return m;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

json default_params(const std::string& name, int d, int e) {
  json p;
  if (name == "linear") {
    p["A"] = matrix_to_json(-0.5 * Eigen::MatrixXd::Identity(e, e));
    p["c"] = vector_to_json(Eigen::VectorXd::Zero(e));
    p["sigma0"] = matrix_to_json(Eigen::MatrixXd::Identity(e, d));
  } else if (name == "bilinear") {
    p["A"] = matrix_to_json(Eigen::MatrixXd::Zero(e, e));
    p["c"] = vector_to_json(Eigen::VectorXd::Zero(e));
    p["sigma0"] = matrix_to_json(Eigen::MatrixXd::Zero(e, d));
    json g = json::array();
    for (int k = 0; k < e; ++k) {
      Eigen::MatrixXd gk = Eigen::MatrixXd::Zero(e, d);
      if (k < d) gk(k, k) = 1.0; // sigma(y) = diag-ish y by default
      g.push_back(matrix_to_json(gk));
    }
    p["G"] = g;
  } else if (name == "tanh") {
    p["A"] = matrix_to_json(-0.5 * Eigen::MatrixXd::Identity(e, e));
    p["sigma0"] = matrix_to_json(Eigen::MatrixXd::Identity(e, d));
    p["D"] = matrix_to_json(0.5 * Eigen::MatrixXd::Ones(e, d));
  } else {
    throw ValidationError("unknown coefficient field '" + name +
                          "' (builtins: linear, bilinear, tanh)");
  }
  return p;
}

} // namespace

rde::CoefficientField CoefficientSpec::build() const {
  const json p = params.is_null() ? default_params(name, dim_d, dim_e) : params;
  if (name == "linear") {
    require_keys(p, {"A", "c", "sigma0"}, "coefficients.params (linear)");
    return rde::make_linear_field(parse_matrix(p.at("A"), "params.A"),
                                  parse_vector(p.at("c"), "params.c"),
                                  parse_matrix(p.at("sigma0"), "params.sigma0"));
  }
  if (name == "bilinear") {
    require_keys(p, {"A", "c", "sigma0", "G"}, "coefficients.params (bilinear)");
    std::vector<Eigen::MatrixXd> g;
    if (!p.at("G").is_array()) throw ValidationError("params.G must be an array of matrices");
    for (const auto& gk : p.at("G")) g.push_back(parse_matrix(gk, "params.G[k]"));
    return rde::make_bilinear_field(parse_matrix(p.at("A"), "params.A"),
                                    parse_vector(p.at("c"), "params.c"),
                                    parse_matrix(p.at("sigma0"), "params.sigma0"), g);
  }
  if (name == "tanh") {
    require_keys(p, {"A", "sigma0", "D"}, "coefficients.params (tanh)");
    return rde::make_tanh_field(parse_matrix(p.at("A"), "params.A"),
                                parse_matrix(p.at("sigma0"), "params.sigma0"),
                                parse_matrix(p.at("D"), "params.D"));
  }
  throw ValidationError("unknown coefficient field '" + name + "'");
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  require_keys(j,
               {"version", "coefficients", "initial_point", "hurst", "grid_level", "kappa",
                "eps_grid", "n_paths", "event", "seed", "z_path"},
               "config");

  ExperimentConfig cfg;
  if (!j.contains("version") || !j.at("version").is_number_integer())
    throw ValidationError("config requires an integer 'version' field");
  cfg.version = j.at("version").get<int>();
  if (cfg.version != 1) throw ValidationError("unsupported config version (expected 1)");

  if (j.contains("coefficients")) {
    const auto& c = j.at("coefficients");
    require_keys(c, {"name", "d", "e", "params"}, "coefficients");
    if (c.contains("name")) cfg.coefficients.name = c.at("name").get<std::string>();
    if (c.contains("d")) cfg.coefficients.dim_d = c.at("d").get<int>();
    if (c.contains("e")) cfg.coefficients.dim_e = c.at("e").get<int>();
    if (c.contains("params")) cfg.coefficients.params = c.at("params");
  }
  const int e = cfg.coefficients.dim_e;

  cfg.initial_point = j.contains("initial_point")
                          ? parse_vector(j.at("initial_point"), "initial_point")
                          : Eigen::VectorXd::Zero(e).eval();
  if (j.contains("hurst")) {
    if (!j.at("hurst").is_number()) throw ValidationError("hurst must be a number");
    cfg.hurst = j.at("hurst").get<double>();
  }
  if (j.contains("grid_level")) cfg.grid_level = j.at("grid_level").get<int>();

  if (j.contains("kappa")) {
    const auto& k = j.at("kappa");
    require_keys(k, {"form", "theta", "eps", "kappa"}, "kappa");
    const std::string form = k.contains("form") ? k.at("form").get<std::string>() : "power";
    if (form == "power") {
      if (k.contains("eps") || k.contains("kappa"))
        throw ValidationError("kappa power form takes only 'theta'");
      cfg.kappa = rde::KappaSpec::power(k.contains("theta") ? k.at("theta").get<double>() : 0.4);
    } else if (form == "table") {
      if (k.contains("theta")) throw ValidationError("kappa table form takes 'eps'/'kappa' lists");
      if (!k.contains("eps") || !k.contains("kappa"))
        throw ValidationError("kappa table form requires 'eps' and 'kappa' lists");
      cfg.kappa = rde::KappaSpec::table(k.at("eps").get<std::vector<double>>(),
                                        k.at("kappa").get<std::vector<double>>());
    } else {
      throw ValidationError("kappa.form must be 'power' or 'table'");
    }
  }

  if (j.contains("eps_grid")) cfg.eps_grid = j.at("eps_grid").get<std::vector<double>>();
  if (j.contains("n_paths")) cfg.n_paths = j.at("n_paths").get<int>();

  if (j.contains("event")) {
    const auto& ev = j.at("event");
    require_keys(ev, {"direction", "threshold"}, "event");
    if (ev.contains("direction")) cfg.event.direction = parse_vector(ev.at("direction"), "event.direction");
    if (ev.contains("threshold")) cfg.event.threshold = ev.at("threshold").get<double>();
  }
  if (cfg.event.direction.size() == 0) {
    cfg.event.direction = Eigen::VectorXd::Zero(e);
    cfg.event.direction[0] = 1.0;
  }

  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned() && !j.at("seed").is_number_integer())
      throw ValidationError("seed must be a non-negative integer");
    cfg.seed = j.at("seed").get<std::uint64_t>();
  }
  if (j.contains("z_path")) {
    const std::string zp = j.at("z_path").get<std::string>();
    if (zp == "difference")
      cfg.z_path = ZPath::DifferenceQuotient;
    else if (zp == "phi")
      cfg.z_path = ZPath::PhiDilated;
    else
      throw ValidationError("z_path must be 'difference' or 'phi'");
  }

  cfg.validate_core();
  return cfg;
}

json ExperimentConfig::to_json() const {
  json j;
  j["version"] = version;
  j["coefficients"] = {{"name", coefficients.name},
                       {"d", coefficients.dim_d},
                       {"e", coefficients.dim_e},
                       {"params", coefficients.params.is_null()
                                      ? default_params(coefficients.name, coefficients.dim_d,
                                                       coefficients.dim_e)
                                      : coefficients.params}};
  j["initial_point"] = vector_to_json(initial_point);
  j["hurst"] = hurst;
  j["grid_level"] = grid_level;
  if (kappa.is_power())
    j["kappa"] = {{"form", "power"}, {"theta", kappa.theta()}};
  else
    j["kappa"] = {{"form", "table"}, {"eps", kappa.table_eps()}, {"kappa", kappa.table_kappa()}};
  j["eps_grid"] = eps_grid;
  j["n_paths"] = n_paths;
  j["event"] = {{"direction", vector_to_json(event.direction)}, {"threshold", event.threshold}};
  j["seed"] = seed;
  j["z_path"] = z_path == ZPath::DifferenceQuotient ? "difference" : "phi";
  return j;
}

void ExperimentConfig::validate_core() const {
  if (coefficients.dim_d < 1 || coefficients.dim_e < 1)
    throw ValidationError("coefficients.d and coefficients.e must be >= 1");
  if (!(hurst > 0.25) || !(hurst <= 0.5))
    throw ValidationError("hurst must lie in (0.25, 0.5], got " + io::format_double(hurst));
  TimeGrid probe(grid_level); // range check
  if (initial_point.size() != coefficients.dim_e)
    throw ValidationError("initial_point length must equal coefficients.e");
  if (event.direction.size() != coefficients.dim_e)
    throw ValidationError("event.direction length must equal coefficients.e");
  if (std::abs(event.direction.norm() - 1.0) > 1e-9)
    throw ValidationError("event.direction must be a unit vector");
  if (!(event.threshold > 0.0)) throw ValidationError("event.threshold must be > 0");
  coefficients.build(); // shape-checks the params
}

void ExperimentConfig::validate() const {
  validate_core();
  if (eps_grid.empty()) throw ValidationError("eps_grid must be nonempty");
  for (std::size_t i = 0; i < eps_grid.size(); ++i) {
    if (!(eps_grid[i] > 0.0) || !(eps_grid[i] <= 1.0))
      throw ValidationError("eps_grid values must lie in (0,1]");
    if (i > 0 && !(eps_grid[i] < eps_grid[i - 1]))
      throw ValidationError("eps_grid must be strictly decreasing");
  }
  if (n_paths < 100) throw ValidationError("n_paths must be >= 100");
  kappa.validate_on(eps_grid);
}

void ExperimentConfig::validate_sampling() const {
  validate_core();
  if (n_paths < 1) throw ValidationError("n_paths must be >= 1");
}

std::string ExperimentConfig::hash() const { return io::fnv1a64_hex(to_json().dump()); }

} // namespace roughmdp::mdp
