#include "stogreed/problem_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace stogreed {

namespace {

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_vector_line(std::ostream& os, const Eigen::VectorXd& v) {
  for (int i = 0; i < v.size(); ++i) {
    if (i) os << ',';
    os << fmt_double(v[i]);
  }
  os << '\n';
}

std::vector<double> parse_csv_line(const std::string& line) {
  std::vector<double> out;
  std::stringstream ss(line);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    out.push_back(std::stod(tok));
  }
  return out;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

BlockObjective ProblemSnapshot::build_objective() const {
  BlockObjective obj = [&] {
    if (kind == "sparse_regression")
      return BlockObjective::sparse_regression(A, y, block_size);
    if (kind == "matrix_recovery") {
      std::vector<Eigen::MatrixXd> ops;
      ops.reserve(A.rows());
      for (int j = 0; j < A.rows(); ++j) {
        const Eigen::VectorXd row = A.row(j).transpose();
        ops.push_back(
            Eigen::Map<const Eigen::MatrixXd>(row.data(), mat_rows, mat_cols));
      }
      return BlockObjective::matrix_recovery(ops, y, block_size);
    }
    throw std::invalid_argument("problem_io: unknown kind '" + kind + "'");
  }();
  if (p.size() > 0) obj.set_weights(p);
  return obj;
}

AtomModel ProblemSnapshot::build_model() const {
  if (kind == "matrix_recovery") return AtomModel::rank_one(mat_rows, mat_cols);
  return AtomModel::coordinate(static_cast<int>(A.cols()));
}

void save_problem(const std::string& path, const ProblemSnapshot& snapshot) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("problem_io: cannot open " + path);
  os << "schema_version = 1\n";
  os << "kind = " << snapshot.kind << "\n";
  os << "m = " << snapshot.A.rows() << "\n";
  if (snapshot.kind == "matrix_recovery") {
    os << "rows = " << snapshot.mat_rows << "\n";
    os << "cols = " << snapshot.mat_cols << "\n";
  } else {
    os << "n = " << snapshot.A.cols() << "\n";
  }
  os << "block_size = " << snapshot.block_size << "\n";
  if (snapshot.p.size() > 0) {
    os << "p = ";
    write_vector_line(os, snapshot.p);
  }
  if (snapshot.w_star.size() > 0) {
    os << "w_star = ";
    write_vector_line(os, snapshot.w_star);
  }
  os << "A:\n";
  for (int i = 0; i < snapshot.A.rows(); ++i)
    write_vector_line(os, snapshot.A.row(i).transpose());
  os << "y:\n";
  write_vector_line(os, snapshot.y);
}

ProblemSnapshot load_problem(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("problem_io: cannot open " + path);

  ProblemSnapshot snap;
  int m = -1, n = -1, schema = -1;
  std::string line;
  std::vector<std::vector<double>> rows;
  Eigen::VectorXd y;
  enum class Section { Header, Design, Observations } section = Section::Header;

  while (std::getline(is, line)) {
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (section == Section::Header) {
      if (t == "A:") {
        section = Section::Design;
        continue;
      }
      const auto eq = t.find('=');
      if (eq == std::string::npos)
        throw std::runtime_error("problem_io: bad header line: " + t);
      const std::string key = trim(t.substr(0, eq));
      const std::string val = trim(t.substr(eq + 1));
      if (key == "schema_version") schema = std::stoi(val);
      else if (key == "kind") snap.kind = val;
      else if (key == "m") m = std::stoi(val);
      else if (key == "n") n = std::stoi(val);
      else if (key == "rows") snap.mat_rows = std::stoi(val);
      else if (key == "cols") snap.mat_cols = std::stoi(val);
      else if (key == "block_size") snap.block_size = std::stoi(val);
      else if (key == "p") {
        const auto vals = parse_csv_line(val);
        snap.p = Eigen::Map<const Eigen::VectorXd>(vals.data(), vals.size());
      } else if (key == "w_star") {
        const auto vals = parse_csv_line(val);
        snap.w_star =
            Eigen::Map<const Eigen::VectorXd>(vals.data(), vals.size());
      } else {
        throw std::runtime_error("problem_io: unknown header key: " + key);
      }
    } else if (section == Section::Design) {
      if (t == "y:") {
        section = Section::Observations;
        continue;
      }
      rows.push_back(parse_csv_line(t));
    } else {
      const auto vals = parse_csv_line(t);
      y = Eigen::Map<const Eigen::VectorXd>(vals.data(), vals.size());
    }
  }

  if (schema != 1)
    throw std::runtime_error("problem_io: unsupported schema version");
  if (snap.kind.empty())
    throw std::runtime_error("problem_io: missing kind");
  if (rows.empty()) throw std::runtime_error("problem_io: missing design");
  if (snap.kind == "matrix_recovery") {
    if (snap.mat_rows < 1 || snap.mat_cols < 1)
      throw std::runtime_error("problem_io: matrix problem needs rows/cols");
    n = snap.mat_rows * snap.mat_cols;
  }
  if (n < 1) throw std::runtime_error("problem_io: missing n");
  if (m >= 0 && static_cast<int>(rows.size()) != m)
    throw std::runtime_error("problem_io: design row count mismatch");

  snap.A.resize(rows.size(), n);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (static_cast<int>(rows[i].size()) != n)
      throw std::runtime_error("problem_io: design row length mismatch");
    snap.A.row(i) =
        Eigen::Map<const Eigen::VectorXd>(rows[i].data(), n).transpose();
  }
  if (y.size() != snap.A.rows())
    throw std::runtime_error("problem_io: y length mismatch");
  snap.y = y;
  return snap;
}

}  // namespace stogreed
