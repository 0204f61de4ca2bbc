#include "sfab/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <unordered_map>

namespace sfab {

namespace {

[[noreturn]] void parse_error(const std::filesystem::path& path, std::size_t line,
                              const std::string& what) {
  fail(ErrorKind::Parse, path.string() + ":" + std::to_string(line) + ": " + what);
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open " + path.string());
  return in;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

bool parse_int(std::string_view tok, long long& out) {
  const char* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, out);
  return ec == std::errc() && ptr == end;
}

bool parse_double(const std::string& tok, double& out) {
  // strtod accepts the Matrix Market float forms (1e-3, -.5, inf).
  char* end = nullptr;
  out = std::strtod(tok.c_str(), &end);
  return end == tok.c_str() + tok.size() && !tok.empty();
}

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> toks;
  std::istringstream ss(line);
  std::string t;
  while (ss >> t) toks.push_back(t);
  return toks;
}

bool is_blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); });
}

}  // namespace

SparseMatrix read_matrix_market(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  std::string line;
  std::size_t lineno = 0;

  if (!std::getline(in, line)) parse_error(path, 1, "empty file");
  ++lineno;
  const auto header = split_ws(lower(line));
  if (header.size() != 5 || header[0] != "%%matrixmarket" || header[1] != "matrix") {
    parse_error(path, lineno, "expected '%%MatrixMarket matrix ...' header");
  }
  if (header[2] != "coordinate") parse_error(path, lineno, "only coordinate format is supported");
  const std::string field = header[3];
  const std::string symmetry = header[4];
  if (field != "real" && field != "integer" && field != "complex" && field != "pattern") {
    parse_error(path, lineno, "unsupported field '" + field + "'");
  }
  if (symmetry != "general" && symmetry != "symmetric" && symmetry != "skew-symmetric" &&
      symmetry != "hermitian") {
    parse_error(path, lineno, "unsupported symmetry '" + symmetry + "'");
  }

  long long rows = -1, cols = -1, nnz = -1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '%' || is_blank(line)) continue;
    const auto toks = split_ws(line);
    if (toks.size() != 3 || !parse_int(toks[0], rows) || !parse_int(toks[1], cols) ||
        !parse_int(toks[2], nnz) || rows < 0 || cols < 0 || nnz < 0) {
      parse_error(path, lineno, "malformed size line");
    }
    break;
  }
  if (nnz < 0) parse_error(path, lineno, "missing size line");

  const std::size_t want_values = field == "complex" ? 2 : (field == "pattern" ? 0 : 1);
  std::vector<Triplet> triplets;
  triplets.reserve(static_cast<std::size_t>(nnz) * (symmetry == "general" ? 1 : 2));
  long long seen = 0;
  while (seen < nnz && std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '%' || is_blank(line)) continue;
    const auto toks = split_ws(line);
    if (toks.size() != 2 + want_values) {
      parse_error(path, lineno, "expected " + std::to_string(2 + want_values) + " tokens");
    }
    long long i = 0, j = 0;
    if (!parse_int(toks[0], i) || !parse_int(toks[1], j)) {
      parse_error(path, lineno, "non-integer index");
    }
    if (i < 1 || i > rows || j < 1 || j > cols) parse_error(path, lineno, "index out of range");
    cplx v = 1.0;
    if (want_values >= 1) {
      double re = 0.0;
      if (!parse_double(toks[2], re)) parse_error(path, lineno, "malformed value");
      v = re;
    }
    if (want_values == 2) {
      double im = 0.0;
      if (!parse_double(toks[3], im)) parse_error(path, lineno, "malformed imaginary part");
      v = cplx(v.real(), im);
    }
    const Index r = static_cast<Index>(i - 1);
    const Index c = static_cast<Index>(j - 1);
    triplets.push_back({r, c, v});
    if (r != c) {
      if (symmetry == "symmetric") triplets.push_back({c, r, v});
      if (symmetry == "skew-symmetric") triplets.push_back({c, r, -v});
      if (symmetry == "hermitian") triplets.push_back({c, r, std::conj(v)});
    }
    ++seen;
  }
  if (seen != nnz) {
    parse_error(path, lineno, "expected " + std::to_string(nnz) + " entries, found " +
                                  std::to_string(seen));
  }
  return SparseMatrix::from_triplets(rows, cols, std::move(triplets));
}

void write_matrix_market(const std::filesystem::path& path, const SparseMatrix& a) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
  const bool real = a.is_real();
  out << "%%MatrixMarket matrix coordinate " << (real ? "real" : "complex") << " general\n";
  out << a.rows() << ' ' << a.cols() << ' ' << a.nnz() << '\n';
  out << std::setprecision(17);
  for (Index r = 0; r < a.rows(); ++r) {
    for (Index p = a.row_ptr()[r]; p < a.row_ptr()[r + 1]; ++p) {
      const cplx v = a.values()[p];
      out << r + 1 << ' ' << a.col_idx()[p] + 1 << ' ' << v.real();
      if (!real) out << ' ' << v.imag();
      out << '\n';
    }
  }
  if (!out) fail(ErrorKind::Io, "write failed for " + path.string());
}

SparseMatrix read_edge_list(const std::filesystem::path& path, bool directed) {
  std::ifstream in = open_input(path);
  std::unordered_map<long long, Index> ids;
  std::vector<std::pair<Index, Index>> edges;
  auto compact = [&ids](long long raw) {
    const auto [it, inserted] = ids.try_emplace(raw, static_cast<Index>(ids.size()));
    return it->second;
  };
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto toks = split_ws(line);
    if (toks.size() < 2) parse_error(path, lineno, "expected 'src dst'");
    long long u = 0, v = 0;
    if (!parse_int(toks[0], u) || !parse_int(toks[1], v)) {
      parse_error(path, lineno, "non-integer node id");
    }
    const Index cu = compact(u);
    const Index cv = compact(v);
    edges.emplace_back(cu, cv);
  }
  const Index n = static_cast<Index>(ids.size());
  std::vector<Triplet> t;
  t.reserve(edges.size() * (directed ? 1 : 2));
  for (auto [u, v] : edges) {
    t.push_back({u, v, 1.0});
    if (!directed && u != v) t.push_back({v, u, 1.0});
  }
  SparseMatrix summed = SparseMatrix::from_triplets(n, n, std::move(t));
  // collapse duplicates to binary
  std::vector<Triplet> binary = summed.to_triplets();
  for (Triplet& e : binary) e.value = 1.0;
  return SparseMatrix::from_triplets(n, n, std::move(binary));
}

SparseMatrix gen_convection_diffusion(Index n, double diffusion) {
  if (n < 2) fail(ErrorKind::Config, "conv-diff: n must be >= 2");
  if (!(diffusion > 0.0)) fail(ErrorKind::Config, "conv-diff: diffusion must be positive");
  const double h = 1.0 / static_cast<double>(n + 1);
  const double dscale = diffusion / (h * h);
  const double cscale = 1.0 / h;

  // 1-D factors as (offset, value) bands: L = tridiag(-1, 2, -1), C = tridiag(-1, 1, 0).
  struct Band {
    Index offset;  // col - row
    double value;
  };
  const std::vector<Band> lap = {{-1, -1.0}, {0, 2.0}, {1, -1.0}};
  const std::vector<Band> conv = {{-1, -1.0}, {0, 1.0}};
  const std::vector<Band> conv_t = {{0, 1.0}, {1, -1.0}};
  const std::vector<Band> ident = {{0, 1.0}};

  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(9 * n * n));
  // Adds scale * (X (x) Y), index (i1, i2) -> i1 * n + i2.
  auto kron = [&](const std::vector<Band>& x, const std::vector<Band>& y, double scale) {
    for (Index i1 = 0; i1 < n; ++i1)
      for (const Band& bx : x) {
        const Index j1 = i1 + bx.offset;
        if (j1 < 0 || j1 >= n) continue;
        for (Index i2 = 0; i2 < n; ++i2)
          for (const Band& by : y) {
            const Index j2 = i2 + by.offset;
            if (j2 < 0 || j2 >= n) continue;
            t.push_back({i1 * n + i2, j1 * n + j2, scale * bx.value * by.value});
          }
      }
  };
  kron(ident, lap, dscale);
  kron(lap, ident, dscale);
  kron(conv, ident, cscale);
  kron(ident, conv_t, cscale);
  return SparseMatrix::from_triplets(n * n, n * n, std::move(t));
}

SparseMatrix in_degree_laplacian(const SparseMatrix& a) {
  require_dims(a.rows() == a.cols(), "in_degree_laplacian: matrix must be square");
  const Index n = a.rows();
  std::vector<cplx> colsum(static_cast<std::size_t>(n), 0.0);
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(a.nnz() + n));
  for (const Triplet& e : a.to_triplets()) {
    colsum[static_cast<std::size_t>(e.col)] += e.value;
    t.push_back({e.row, e.col, -e.value});
  }
  for (Index j = 0; j < n; ++j) {
    if (colsum[static_cast<std::size_t>(j)] != cplx(0.0, 0.0)) {
      t.push_back({j, j, colsum[static_cast<std::size_t>(j)]});
    }
  }
  return SparseMatrix::from_triplets(n, n, std::move(t));
}

Vector read_vector_file(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  std::vector<double> vals;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto toks = split_ws(line);
    if (toks.empty() || toks[0][0] == '#') continue;
    if (toks.size() != 1) parse_error(path, lineno, "expected one value per line");
    double v = 0.0;
    if (!parse_double(toks[0], v)) parse_error(path, lineno, "malformed value");
    vals.push_back(v);
  }
  Vector out(static_cast<Index>(vals.size()));
  for (std::size_t i = 0; i < vals.size(); ++i) out(static_cast<Index>(i)) = vals[i];
  return out;
}

void write_vector_file(const std::filesystem::path& path, const Vector& v) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
  out << std::setprecision(17);
  for (Index i = 0; i < v.size(); ++i) out << v(i).real() << '\n';
}

Vector build_rhs(const RhsSpec& spec, Index n) {
  switch (spec.kind) {
    case RhsSpec::Kind::OnesNormalized:
      return Vector::Constant(n, cplx(1.0 / std::sqrt(static_cast<double>(n)), 0.0));
    case RhsSpec::Kind::UnitIndex: {
      if (spec.index < 0 || spec.index >= n) {
        fail(ErrorKind::Config, "rhs: unit index " + std::to_string(spec.index) +
                                    " out of range for size " + std::to_string(n));
      }
      Vector e = Vector::Zero(n);
      e(spec.index) = 1.0;
      return e;
    }
    case RhsSpec::Kind::File: {
      Vector v = read_vector_file(spec.path);
      if (v.size() != n) {
        fail(ErrorKind::Config, "rhs: file has " + std::to_string(v.size()) +
                                    " entries, expected " + std::to_string(n));
      }
      return v;
    }
  }
  fail(ErrorKind::Internal, "rhs: unknown kind");
}

LinearOperator Problem::op() const {
  LinearOperator base = base_op();
  return squared ? LinearOperator::squared(std::move(base)) : base;
}

LinearOperator Problem::base_op() const { return LinearOperator::from_sparse(matrix); }

DenseMatrix Problem::dense_op() const {
  const DenseMatrix q = matrix->to_dense();
  return squared ? DenseMatrix(q * q) : q;
}

Problem load_problem(const ProblemSpec& spec) {
  SparseMatrix a = std::visit(
      [](const auto& src) -> SparseMatrix {
        using T = std::decay_t<decltype(src)>;
        if constexpr (std::is_same_v<T, MatrixMarketSource>) {
          return read_matrix_market(src.path);
        } else if constexpr (std::is_same_v<T, EdgeListSource>) {
          return read_edge_list(src.path, src.directed);
        } else {
          return gen_convection_diffusion(src.n, src.diffusion);
        }
      },
      spec.source);
  if (a.rows() != a.cols()) fail(ErrorKind::Config, "problem: matrix must be square");
  if (spec.transform == Transform::InDegreeLaplacian) a = in_degree_laplacian(a);
  Problem p;
  p.squared = spec.transform == Transform::Square;
  p.b = build_rhs(spec.rhs, a.rows());
  p.matrix = std::make_shared<const SparseMatrix>(std::move(a));
  return p;
}

}  // namespace sfab
