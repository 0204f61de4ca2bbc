#pragma once

#include <filesystem>
#include <string>
#include <variant>

#include "sfab/sparse.hpp"

namespace sfab {

/// Reads a Matrix Market coordinate file (real, integer, complex or pattern;
/// general, symmetric, skew-symmetric or hermitian). Symmetric storage is
/// expanded, indices are converted to 0-based and duplicates are summed.
/// Malformed input throws a Parse error naming the line number.
SparseMatrix read_matrix_market(const std::filesystem::path& path);

/// Writes a general coordinate file; values are printed with 17 significant
/// digits so a read-back is lossless. Real matrices use the `real` field.
void write_matrix_market(const std::filesystem::path& path, const SparseMatrix& a);

/// Reads a SNAP-style edge list ("u v" per line, '#' comments) into a binary
/// adjacency matrix. Node ids are compacted to 0..N-1 in first-seen order;
/// duplicate edges collapse to 1, self-loops are kept. Undirected input stores
/// both (u, v) and (v, u).
SparseMatrix read_edge_list(const std::filesystem::path& path, bool directed);

/// A = (D/h^2)(I (x) L + L (x) I) + (1/h)(C (x) I + I (x) C^T) on an n x n grid,
/// with h = 1/(n+1), L = tridiag(-1, 2, -1), C = tridiag(-1, 1, 0).
SparseMatrix gen_convection_diffusion(Index n, double diffusion);

/// L = D_in - A where D_in holds the column sums of A.
SparseMatrix in_degree_laplacian(const SparseMatrix& a);

/// One float per line; blank lines and '#' comments are skipped.
Vector read_vector_file(const std::filesystem::path& path);
void write_vector_file(const std::filesystem::path& path, const Vector& v);

struct RhsSpec {
  enum class Kind { OnesNormalized, UnitIndex, File };
  Kind kind = Kind::OnesNormalized;
  Index index = 0;  // 0-based, for UnitIndex
  std::filesystem::path path;

  static RhsSpec ones() { return {}; }
  static RhsSpec unit(Index i) { return {Kind::UnitIndex, i, {}}; }
  static RhsSpec file(std::filesystem::path p) { return {Kind::File, 0, std::move(p)}; }
};

Vector build_rhs(const RhsSpec& spec, Index n);

struct MatrixMarketSource {
  std::filesystem::path path;
};
struct EdgeListSource {
  std::filesystem::path path;
  bool directed = true;
};
struct ConvDiffSource {
  Index n = 100;
  double diffusion = 1e-3;
};

enum class Transform {
  None,
  Square,              // operator Q applied twice, never formed
  InDegreeLaplacian,   // replace A by D_in - A
};

struct ProblemSpec {
  std::variant<MatrixMarketSource, EdgeListSource, ConvDiffSource> source = ConvDiffSource{};
  RhsSpec rhs;
  Transform transform = Transform::None;
};

/// A loaded problem: the stored matrix, the operator a solver iterates with
/// (possibly matrix-free), and the right-hand side.
struct Problem {
  std::shared_ptr<const SparseMatrix> matrix;
  bool squared = false;
  Vector b;

  Index size() const { return matrix ? matrix->rows() : 0; }
  /// Fresh operator (with its own matvec counter).
  LinearOperator op() const;
  /// Operator for the stored matrix itself, ignoring the square transform.
  LinearOperator base_op() const;
  /// Dense form of op(); only for small problems.
  DenseMatrix dense_op() const;
};

Problem load_problem(const ProblemSpec& spec);

}  // namespace sfab
