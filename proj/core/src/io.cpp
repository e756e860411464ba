#include "benson/io.hpp"

#include "benson/errors.hpp"
#include "benson/scalarization.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace benson {

using json = nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ParseError(where + ": " + what);
}

const json& field(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) fail(where, std::string("missing field '") + key + "'");
  return j.at(key);
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) fail(where, "expected a number");
  return j.get<double>();
}

// null stands for an open side.
double bound(const json& j, double open, const std::string& where) {
  if (j.is_null()) return open;
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf" || s == "+inf") return kInf;
    if (s == "-inf") return -kInf;
  }
  return number(j, where);
}

Vec vector_of(const json& j, const std::string& where) {
  if (!j.is_array()) fail(where, "expected an array of numbers");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = number(j[i], where + "[" + std::to_string(i) + "]");
  return v;
}

// A list of vectors becomes the columns of a matrix.
Mat columns_of(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) fail(where, "expected a non-empty list of vectors");
  std::vector<Vec> cols;
  for (std::size_t i = 0; i < j.size(); ++i) cols.push_back(vector_of(j[i], where + "[" + std::to_string(i) + "]"));
  const auto rows = cols.front().size();
  Mat m(rows, static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (cols[i].size() != rows) fail(where, "vectors of different lengths");
    m.col(static_cast<Eigen::Index>(i)) = cols[i];
  }
  return m;
}

Mat rows_of(const json& j, const std::string& where) {
  Mat m = columns_of(j, where);
  return m.transpose();
}

Expr parse_expr(const json& j, const std::string& path) {
  if (j.is_number()) return Expr::constant(j.get<double>());
  if (!j.is_object()) fail(path, "expected an expression object");
  const std::string op = field(j, "op", path).get<std::string>();
  auto arg = [&]() { return parse_expr(field(j, "arg", path), path + ".arg"); };
  auto args = [&]() {
    const json& a = field(j, "args", path);
    if (!a.is_array()) fail(path + ".args", "expected a list of expressions");
    std::vector<Expr> out;
    for (std::size_t i = 0; i < a.size(); ++i) out.push_back(parse_expr(a[i], path + ".args[" + std::to_string(i) + "]"));
    return out;
  };
  if (op == "const") return Expr::constant(number(field(j, "value", path), path + ".value"));
  if (op == "var") {
    const json& idx = field(j, "index", path);
    if (!idx.is_number_integer() || idx.get<int>() < 0) fail(path + ".index", "expected a nonnegative integer");
    return Expr::variable(idx.get<int>());
  }
  if (op == "sum") return Expr::sum(args());
  if (op == "scale") return Expr::scaled(number(field(j, "coef", path), path + ".coef"), arg());
  if (op == "mul") {
    std::vector<Expr> a = args();
    if (a.size() != 2) fail(path, "'mul' takes exactly two arguments");
    if (a[0].kind() == Expr::Kind::Constant) return Expr::scaled(a[0].scalar(), a[1]);
    if (a[1].kind() == Expr::Kind::Constant) return Expr::scaled(a[1].scalar(), a[0]);
    throw ConvexityError(path + ": 'mul' needs a constant factor");
  }
  if (op == "affine") {
    const double offset = j.contains("const") ? number(j.at("const"), path + ".const") : 0.0;
    return Expr::affine(vector_of(field(j, "coef", path), path + ".coef"), offset);
  }
  try {
    if (op == "square") return Expr::square(arg());
    if (op == "pow") {
      const json& p = field(j, "p", path);
      if (!p.is_number_integer()) throw ConvexityError("exponent must be an even integer");
      return Expr::power(arg(), p.get<int>());
    }
    if (op == "exp") return Expr::exp(arg());
    if (op == "abs") return Expr::abs(arg());
    if (op == "max") return Expr::max(args());
    if (op == "quadform") return Expr::quad_form(rows_of(field(j, "Q", path), path + ".Q"), args());
  } catch (const ConvexityError& e) {
    const std::string msg = e.what();
    if (msg.rfind(path, 0) == 0) throw;
    throw ConvexityError(path + ": " + msg);
  } catch (const std::invalid_argument& e) {
    fail(path, e.what());
  }
  throw ConvexityError(path + ": operator '" + op + "' is not in the convex whitelist");
}

std::string locate(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

std::vector<Expr> parse_list(const json& j, const std::string& where) {
  if (!j.is_array()) fail(where, "expected a list of expressions");
  std::vector<Expr> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(parse_expr(j[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

void check_convex_list(const std::vector<Expr>& es, const std::string& where) {
  for (std::size_t i = 0; i < es.size(); ++i) {
    if (!es[i].is_convex()) {
      throw ConvexityError(where + "[" + std::to_string(i) + "] is not convex (curvature " +
                           to_string(es[i].curvature()) + ")");
    }
  }
}

OrderingCone parse_cone(const json& j, int q, std::optional<Mat>& frame) {
  const std::string where = "cone_C";
  if (j.is_string()) {
    if (j.get<std::string>() != "orthant") fail(where, "unknown cone '" + j.get<std::string>() + "'");
    return OrderingCone::orthant(q);
  }
  if (!j.is_object()) fail(where, "expected \"orthant\" or an object");
  const Vec c = j.contains("c") ? vector_of(j.at("c"), where + ".c") : Vec::Ones(q);
  if (c.size() != q) fail(where + ".c", "length differs from the number of objectives");
  if (j.contains("c_frame")) {
    Mat f = columns_of(j.at("c_frame"), where + ".c_frame");
    if (f.rows() != q || f.cols() != q - 1) fail(where + ".c_frame", "expected q-1 vectors of length q");
    frame = f;
  }
  const bool orth = j.contains("type") && j.at("type") == "orthant";
  const bool has_y = j.contains("generators");
  const bool has_z = j.contains("dual_generators");
  if (orth) return OrderingCone::orthant(q, c);
  if (has_y && has_z) {
    return OrderingCone(columns_of(j.at("generators"), where + ".generators"),
                        columns_of(j.at("dual_generators"), where + ".dual_generators"), c);
  }
  if (has_z) return OrderingCone::from_dual(columns_of(j.at("dual_generators"), where + ".dual_generators"), c);
  if (has_y) return OrderingCone::from_generators(columns_of(j.at("generators"), where + ".generators"), c);
  fail(where, "needs 'generators', 'dual_generators' or \"type\": \"orthant\"");
}

json vec_json(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

json vecs_json(const std::vector<Vec>& vs) {
  json a = json::array();
  for (const auto& v : vs) a.push_back(vec_json(v));
  return a;
}

json mat_rows_json(const Mat& m) {
  json a = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) a.push_back(vec_json(m.row(i).transpose()));
  return a;
}

Vec json_vec(const json& j) {
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  return v;
}

Mat json_mat_rows(const json& j, int cols) {
  Mat m(static_cast<Eigen::Index>(j.size()), cols);
  for (std::size_t i = 0; i < j.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = json_vec(j[i]).transpose();
  return m;
}

json poly_json(const Polyhedron& p) {
  json h = json::array();
  for (const auto& hs : p.hrep().halfspaces) h.push_back({{"normal", vec_json(hs.normal)}, {"offset", hs.offset}});
  json out{{"hrep", h}};
  if (!p.dirty()) {
    out["vrep"] = {{"vertices", vecs_json(p.cached_vrep().vertices)}, {"rays", vecs_json(p.cached_vrep().rays)}};
  }
  return out;
}

Polyhedron poly_from_json(const json& j, int q) {
  HRep h;
  for (const auto& hs : j.at("hrep")) h.halfspaces.push_back({json_vec(hs.at("normal")), hs.at("offset").get<double>()});
  return Polyhedron(q, h);
}

json stats_json(const RunStats& s) {
  return {{"num_scalar_solves", s.num_scalar_solves},
          {"num_cached", s.num_cached},
          {"num_vertex_enumerations", s.num_vertex_enumerations},
          {"iterations", s.iterations},
          {"card_X", s.card_X},
          {"card_T", s.card_T},
          {"merged_primal", s.merged_primal},
          {"merged_dual", s.merged_dual},
          {"merged_vertices", s.merged_vertices},
          {"not_attained", s.not_attained},
          {"wall_time", s.wall_time},
          {"achieved_epsilon", s.achieved_epsilon},
          {"max_gap_per_iteration", s.max_gap_per_iteration}};
}

RunStats stats_from_json(const json& j) {
  RunStats s;
  s.num_scalar_solves = j.at("num_scalar_solves");
  s.num_cached = j.at("num_cached");
  s.num_vertex_enumerations = j.at("num_vertex_enumerations");
  s.iterations = j.at("iterations");
  s.card_X = j.at("card_X");
  s.card_T = j.at("card_T");
  s.merged_primal = j.at("merged_primal");
  s.merged_dual = j.at("merged_dual");
  s.merged_vertices = j.at("merged_vertices");
  s.not_attained = j.at("not_attained");
  s.wall_time = j.at("wall_time");
  s.achieved_epsilon = j.at("achieved_epsilon");
  s.max_gap_per_iteration = j.at("max_gap_per_iteration").get<std::vector<double>>();
  return s;
}

// JSON has no infinity; margins of empty checks are stored as null.
json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json report_json(const CertificationReport& r) {
  json checks = json::array();
  for (const auto& c : r.checks) {
    checks.push_back({{"name", c.name}, {"pass", c.pass}, {"margin", finite_or_null(c.margin)}, {"detail", c.detail}});
  }
  json out{{"epsilon", r.epsilon}, {"all_pass", r.all_pass()}, {"checks", checks}};
  out["achieved_epsilon"] = r.achieved_epsilon ? json(*r.achieved_epsilon) : json(nullptr);
  return out;
}

CertificationReport report_from_json(const json& j) {
  CertificationReport r;
  r.epsilon = j.at("epsilon");
  if (!j.at("achieved_epsilon").is_null()) r.achieved_epsilon = j.at("achieved_epsilon").get<double>();
  for (const auto& c : j.at("checks")) {
    CertificationCheck k;
    k.name = c.at("name");
    k.pass = c.at("pass");
    k.margin = c.at("margin").is_null() ? kInf : c.at("margin").get<double>();
    k.detail = c.at("detail");
    r.checks.push_back(k);
  }
  return r;
}

template <typename E>
E enum_from(const std::string& s, std::initializer_list<E> all) {
  for (E e : all) {
    if (s == to_string(e)) return e;
  }
  throw ParseError("unknown value '" + s + "' in result bundle");
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream f(p);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  f << text;
}

std::string hrep_csv(const HRep& h, int q) {
  std::ostringstream os;
  os << std::setprecision(17);
  for (int i = 0; i < q; ++i) os << "n" << i + 1 << ",";
  os << "offset\n";
  for (const auto& hs : h.halfspaces) {
    for (int i = 0; i < q; ++i) os << hs.normal(i) << ",";
    os << hs.offset << "\n";
  }
  return os.str();
}

std::string vrep_csv(const VRep& v, int q) {
  std::ostringstream os;
  os << std::setprecision(17) << "kind";
  for (int i = 0; i < q; ++i) os << ",y" << i + 1;
  os << "\n";
  auto row = [&](const char* kind, const Vec& p) {
    os << kind;
    for (int i = 0; i < q; ++i) os << "," << p(i);
    os << "\n";
  };
  for (const auto& p : v.vertices) row("vertex", p);
  for (const auto& r : v.rays) row("ray", r);
  return os.str();
}

VRep vrep_of(const Polyhedron& p) {
  if (!p.dirty()) return p.cached_vrep();
  return enumerate_vertices(p.hrep(), p.dim(), p.tolerances());
}

// Vertices in plotting order: by the first coordinate in 2D.
std::string plot_csv(const std::vector<std::pair<std::string, std::vector<Vec>>>& sets, int q) {
  std::ostringstream os;
  os << std::setprecision(17) << "set,index";
  for (int i = 0; i < q; ++i) os << ",y" << i + 1;
  os << "\n";
  for (const auto& [name, pts] : sets) {
    std::vector<Vec> sorted = pts;
    std::sort(sorted.begin(), sorted.end(), [](const Vec& a, const Vec& b) { return lex_less(a, b); });
    for (std::size_t k = 0; k < sorted.size(); ++k) {
      os << name << "," << k;
      for (int i = 0; i < q; ++i) os << "," << sorted[k](i);
      os << "\n";
    }
  }
  return os.str();
}

}  // namespace

CvopProblem parse_problem(const std::string& text, const std::string& source, const SolverOptions& opts) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(source + ": " + locate(text, e.byte) + ": malformed JSON");
  }
  try {
    const json& vars = field(doc, "variables", source);
    const json& count = field(vars, "count", "variables");
    if (!count.is_number_integer() || count.get<int>() < 1) fail("variables.count", "expected a positive integer");
    const int n = count.get<int>();
    Box box = Box::unbounded(n);
    for (const char* side : {"lower", "upper"}) {
      if (!vars.contains(side)) continue;
      const json& b = vars.at(side);
      const std::string where = std::string("variables.") + side;
      if (!b.is_array() || static_cast<int>(b.size()) != n) fail(where, "expected " + std::to_string(n) + " bounds");
      const bool lo = std::string(side) == "lower";
      for (int i = 0; i < n; ++i) {
        const double v = bound(b[static_cast<std::size_t>(i)], lo ? -kInf : kInf, where + "[" + std::to_string(i) + "]");
        (lo ? box.lower : box.upper)(i) = v;
      }
    }
    std::vector<Expr> objectives = parse_list(field(doc, "objectives", source), "objectives");
    std::vector<Expr> constraints =
        doc.contains("constraints") ? parse_list(doc.at("constraints"), "constraints") : std::vector<Expr>{};
    const int q = static_cast<int>(objectives.size());
    if (q < 2) fail("objectives", "need at least two objectives");
    check_convex_list(constraints, "constraints");

    std::optional<Mat> frame;
    OrderingCone cone = parse_cone(doc.contains("cone_C") ? doc.at("cone_C") : json("orthant"), q, frame);

    std::optional<Mat> dgen;
    if (doc.contains("cone_D")) {
      const json& d = doc.at("cone_D");
      if (d.is_object()) {
        Mat m = columns_of(field(d, "dual_generators", "cone_D"), "cone_D.dual_generators");
        if (m.rows() != static_cast<Eigen::Index>(constraints.size())) {
          fail("cone_D.dual_generators", "vectors must have one entry per constraint");
        }
        constraints = reduce_D_cone(constraints, m);
        dgen = m;
      } else if (!(d.is_string() && d.get<std::string>() == "orthant")) {
        fail("cone_D", "expected \"orthant\" or an object with 'dual_generators'");
      }
    }
    const std::string name = doc.contains("name") ? doc.at("name").get<std::string>() : source;
    CvopProblem prob(name, n, std::move(objectives), std::move(constraints), std::move(box), std::move(cone));
    prob.cone_D_dual_generators = dgen;
    prob.c_frame = frame;
    if (doc.contains("start")) prob.witness = vector_of(doc.at("start"), "start");
    attach_witness(prob, opts);
    return prob;
  } catch (const json::exception& e) {
    throw ParseError(source + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw ParseError(source + ": " + e.what());
  }
}

CvopProblem load_problem(const std::string& path, const SolverOptions& opts) {
  std::ifstream f(path);
  if (!f) throw ParseError(path + ": cannot open file");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_problem(ss.str(), path, opts);
}

std::string report_to_json(const CertificationReport& report) { return report_json(report).dump(2); }

std::string bundle_to_json(const std::string& problem, const EpsilonSolution& sol, const CertificationReport* report) {
  json pp = json::array();
  for (const auto& p : sol.primal_points) {
    pp.push_back({{"x", vec_json(p.x)}, {"y", vec_json(p.y)}, {"source", to_string(p.source)}, {"gap", p.gap}});
  }
  json dp = json::array();
  for (const auto& d : sol.dual_points) dp.push_back({{"t", vec_json(d.t)}, {"d", vec_json(d.d)}});
  json doc{{"format", "cvbenson-result"},
           {"version", 1},
           {"problem", problem},
           {"algorithm", to_string(sol.algorithm)},
           {"break", to_string(sol.break_mode)},
           {"variant", to_string(sol.granularity)},
           {"epsilon", sol.epsilon},
           {"complete", sol.complete},
           {"q", sol.c.size()},
           {"c", vec_json(sol.c)},
           {"T", mat_rows_json(sol.T)},
           {"cone_generators", mat_rows_json(sol.cone_generators.transpose())},
           {"primal_points", pp},
           {"dual_points", dp},
           {"polyhedra",
            {{"inner_primal", poly_json(sol.inner_primal)},
             {"outer_primal", poly_json(sol.outer_primal)},
             {"inner_dual", poly_json(sol.inner_dual)},
             {"outer_dual", poly_json(sol.outer_dual)}}},
           {"stats", stats_json(sol.stats)}};
  if (report) doc["certification"] = report_json(*report);
  return doc.dump(2);
}

ResultBundle bundle_from_json(const std::string& text) {
  try {
    const json doc = json::parse(text);
    if (doc.at("format") != "cvbenson-result") throw ParseError("not a result bundle");
    const int q = doc.at("q");
    EpsilonSolution sol(q);
    sol.algorithm = enum_from(doc.at("algorithm").get<std::string>(), {Algorithm::Primal, Algorithm::Dual});
    sol.break_mode = enum_from(doc.at("break").get<std::string>(), {BreakMode::Break, BreakMode::NoBreak});
    sol.granularity =
        enum_from(doc.at("variant").get<std::string>(), {Granularity::Fine, Granularity::Alternative});
    sol.epsilon = doc.at("epsilon");
    sol.complete = doc.at("complete");
    sol.c = json_vec(doc.at("c"));
    sol.T = json_mat_rows(doc.at("T"), q);
    sol.cone_generators = json_mat_rows(doc.at("cone_generators"), q).transpose();
    for (const auto& p : doc.at("primal_points")) {
      const std::string src = p.at("source");
      sol.primal_points.push_back({json_vec(p.at("x")), json_vec(p.at("y")),
                                   enum_from(src, {PointSource::Init, PointSource::Cut, PointSource::Accept}),
                                   p.at("gap").get<double>()});
    }
    for (const auto& d : doc.at("dual_points")) sol.dual_points.push_back({json_vec(d.at("t")), json_vec(d.at("d"))});
    const json& polys = doc.at("polyhedra");
    sol.inner_primal = poly_from_json(polys.at("inner_primal"), q);
    sol.outer_primal = poly_from_json(polys.at("outer_primal"), q);
    sol.inner_dual = poly_from_json(polys.at("inner_dual"), q);
    sol.outer_dual = poly_from_json(polys.at("outer_dual"), q);
    sol.stats = stats_from_json(doc.at("stats"));
    ResultBundle b{doc.at("problem").get<std::string>(), std::move(sol), std::nullopt};
    if (doc.contains("certification")) b.report = report_from_json(doc.at("certification"));
    return b;
  } catch (const json::exception& e) {
    throw ParseError(std::string("result bundle: ") + e.what());
  }
}

void save_bundle(const std::string& path, const std::string& problem, const EpsilonSolution& sol,
                 const CertificationReport* report) {
  write_file(path, bundle_to_json(problem, sol, report));
}

ResultBundle load_bundle(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ParseError(path + ": cannot open file");
  std::stringstream ss;
  ss << f.rdbuf();
  return bundle_from_json(ss.str());
}

std::string stats_csv(const EpsilonSolution& sol) {
  std::ostringstream os;
  os << "epsilon,alg/variant,num_opt,num_vert_enum,card_X,card_T,time_s\n";
  os << sol.epsilon << "," << to_string(sol.algorithm) << "/" << to_string(sol.break_mode) << "/"
     << to_string(sol.granularity) << "," << sol.stats.num_scalar_solves << "," << sol.stats.num_vertex_enumerations
     << "," << sol.stats.card_X << "," << sol.stats.card_T << "," << std::fixed << std::setprecision(6)
     << sol.stats.wall_time << "\n";
  return os.str();
}

void write_outputs(const std::string& dir, const std::string& problem, const EpsilonSolution& sol,
                   const CertificationReport* report, OutputFormat format) {
  namespace fs = std::filesystem;
  const fs::path root(dir);
  fs::create_directories(root);
  write_file(root / "solution.json", bundle_to_json(problem, sol, report));
  if (format == OutputFormat::Json) {
    write_file(root / "stats.json", stats_json(sol.stats).dump(2));
    return;
  }
  const int q = static_cast<int>(sol.c.size());
  const std::pair<const char*, const Polyhedron*> polys[] = {{"inner_primal", &sol.inner_primal},
                                                             {"outer_primal", &sol.outer_primal},
                                                             {"inner_dual", &sol.inner_dual},
                                                             {"outer_dual", &sol.outer_dual}};
  for (const auto& [name, p] : polys) {
    write_file(root / (std::string(name) + ".hrep.csv"), hrep_csv(p->hrep(), q));
    write_file(root / (std::string(name) + ".vrep.csv"), vrep_csv(vrep_of(*p), q));
  }
  write_file(root / "stats.csv", stats_csv(sol));
  write_file(root / "plot_primal.csv", plot_csv({{"outer", vrep_of(sol.outer_primal).vertices},
                                                 {"inner", vrep_of(sol.inner_primal).vertices},
                                                 {"image", sol.images()}},
                                                q));
  write_file(root / "plot_dual.csv", plot_csv({{"outer", vrep_of(sol.outer_dual).vertices},
                                               {"inner", vrep_of(sol.inner_dual).vertices},
                                               {"image", sol.dual_images()}},
                                              q));
}

std::string error_json(const std::string& kind, const std::string& message) {
  return json{{"error", {{"kind", kind}, {"message", message}}}}.dump(2);
}

}  // namespace benson
