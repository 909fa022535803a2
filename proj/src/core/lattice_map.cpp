#include "core/lattice_map.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "core/csvio.h"

namespace bernkoop {

DataSet load_dataset_csv(const std::string& path) {
  const CsvTable table = read_csv(path);
  require(!table.rows.empty(), Status::IoError, "empty data file " + path);
  std::size_t first = 0;
  int m = 0;
  {
    const auto& head = table.rows[0];
    require(head.size() % 2 == 0 && !head.empty(), Status::IoError,
            "data file needs an even column count, got " + std::to_string(head.size()));
    bool numeric = true;
    try {
      parse_double(head[0]);
    } catch (const Error&) {
      numeric = false;
    }
    m = static_cast<int>(head.size() / 2);
    if (!numeric) first = 1;
  }
  DataSet data;
  data.m = m;
  for (std::size_t r = first; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    require(row.size() == static_cast<std::size_t>(2 * m), Status::IoError,
            "row " + std::to_string(r + 1) + " has " + std::to_string(row.size()) +
                " cells, expected " + std::to_string(2 * m));
    Vec xv(m), yv(m);
    for (int l = 0; l < m; ++l) xv[l] = parse_double(row[l]);
    for (int l = 0; l < m; ++l) yv[l] = parse_double(row[m + l]);
    data.x.push_back(std::move(xv));
    data.y.push_back(std::move(yv));
  }
  require(!data.x.empty(), Status::IoError, "no data rows in " + path);
  return data;
}

void save_dataset_csv(const std::string& path, const DataSet& data) {
  CsvWriter out(path);
  out.comment("m=" + std::to_string(data.m) + " count=" + std::to_string(data.size()));
  std::vector<std::string> cells;
  for (int l = 0; l < data.m; ++l) cells.push_back("x" + std::to_string(l + 1));
  for (int l = 0; l < data.m; ++l) cells.push_back("y" + std::to_string(l + 1));
  out.row(cells);
  for (std::size_t j = 0; j < data.size(); ++j) {
    cells.clear();
    for (int l = 0; l < data.m; ++l) cells.push_back(format_double(data.x[j][l]));
    for (int l = 0; l < data.m; ++l) cells.push_back(format_double(data.y[j][l]));
    out.row(cells);
  }
  out.close();
}

DataSet generate_lattice_dataset(const MapOnBox& map, const DegreeVector& degree) {
  require(map.m == degree.m(), Status::ShapeError, "map dimension disagrees with degree");
  const LatticeGrid grid(degree);
  DataSet data;
  data.m = map.m;
  for (std::size_t j = 0; j < grid.N(); ++j) {
    Vec x = grid.point(j);
    data.y.push_back(map.eval(x));
    data.x.push_back(std::move(x));
  }
  return data;
}

DataSet generate_jittered_dataset(const MapOnBox& map, const DegreeVector& degree, double jitter,
                                  std::uint64_t seed) {
  require(map.m == degree.m(), Status::ShapeError, "map dimension disagrees with degree");
  require(jitter >= 0.0 && jitter < 0.5, Status::DomainError,
          "jitter must stay below half a cell");
  const LatticeGrid grid(degree);
  const int m = degree.m();
  Rng rng(seed);
  DataSet data;
  data.m = m;
  for (std::size_t j = 0; j < grid.N(); ++j) {
    const std::vector<int> k = grid.multi_index(j);
    Vec x = grid.point(j);
    for (int l = 0; l < m; ++l) {
      // Boundary nodes stay on their faces so the map covers the whole box.
      if (k[l] == 0 || k[l] == degree.degrees[l]) continue;
      const double cell = 1.0 / degree.degrees[l];
      x[l] = std::clamp(x[l] + jitter * cell * (2.0 * rng.uniform() - 1.0), 0.0, 1.0);
    }
    data.y.push_back(map.eval(x));
    data.x.push_back(std::move(x));
  }
  for (std::size_t j = data.size(); j > 1; --j) {
    const auto pick =
        std::min(static_cast<std::size_t>(rng.uniform() * static_cast<double>(j)), j - 1);
    std::swap(data.x[j - 1], data.x[pick]);
    std::swap(data.y[j - 1], data.y[pick]);
  }
  return data;
}

std::vector<std::size_t> load_permutation_csv(const std::string& path, std::size_t n) {
  const CsvTable table = read_csv(path);
  std::vector<std::size_t> perm;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    require(row.size() == 1, Status::IoError, "permutation file must have one column");
    if (r == 0) {
      try {
        parse_int(row[0]);
      } catch (const Error&) {
        continue;  // header row
      }
    }
    const int v = parse_int(row[0]);
    require(v >= 1 && static_cast<std::size_t>(v) <= n, Status::IoError,
            "permutation entry " + row[0] + " outside 1.." + std::to_string(n));
    perm.push_back(static_cast<std::size_t>(v - 1));
  }
  require(perm.size() == n, Status::IoError,
          "permutation file has " + std::to_string(perm.size()) + " entries, expected " +
              std::to_string(n));
  std::vector<bool> seen(n, false);
  for (std::size_t v : perm) {
    require(!seen[v], Status::IoError, "duplicate permutation entry " + std::to_string(v + 1));
    seen[v] = true;
  }
  return perm;
}

void save_permutation_csv(const std::string& path, const std::vector<std::size_t>& perm) {
  CsvWriter out(path);
  out.row({"index"});
  for (std::size_t v : perm) out.row({std::to_string(v + 1)});
  out.close();
}

namespace {

int orientation(const Vec& a, const Vec& b, const Vec& c) {
  const double cross = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
  const double scale = std::abs(b[0] - a[0]) + std::abs(b[1] - a[1]) + std::abs(c[0] - a[0]) +
                       std::abs(c[1] - a[1]);
  if (std::abs(cross) <= 1e-15 * std::max(1.0, scale * scale)) return 0;
  return cross > 0 ? 1 : -1;
}

bool on_segment(const Vec& a, const Vec& b, const Vec& p) {
  return std::min(a[0], b[0]) - 1e-15 <= p[0] && p[0] <= std::max(a[0], b[0]) + 1e-15 &&
         std::min(a[1], b[1]) - 1e-15 <= p[1] && p[1] <= std::max(a[1], b[1]) + 1e-15;
}

bool segments_cross(const Vec& p1, const Vec& p2, const Vec& q1, const Vec& q2) {
  const int o1 = orientation(p1, p2, q1);
  const int o2 = orientation(p1, p2, q2);
  const int o3 = orientation(q1, q2, p1);
  const int o4 = orientation(q1, q2, p2);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(p1, p2, q1)) return true;
  if (o2 == 0 && on_segment(p1, p2, q2)) return true;
  if (o3 == 0 && on_segment(q1, q2, p1)) return true;
  if (o4 == 0 && on_segment(q1, q2, p2)) return true;
  return false;
}

void verify_no_duplicates(const DataSet& data, const std::vector<std::size_t>& order) {
  for (std::size_t r = 1; r < order.size(); ++r)
    require(data.x[order[r - 1]] != data.x[order[r]], Status::DomainError,
            "data points must be distinct");
}

// Every pair of induced lattice-edge images that shares no endpoint must be
// disjoint, otherwise the piecewise-linear extension cannot be injective.
void verify_edges(const DataSet& data, const DegreeVector& degree,
                  const std::vector<std::size_t>& perm) {
  const LatticeGrid grid(degree);
  struct Edge {
    std::size_t a, b;  // lattice flat indices
  };
  std::vector<Edge> edges;
  for (std::size_t j = 0; j < grid.N(); ++j) {
    const std::vector<int> k = grid.multi_index(j);
    for (int axis = 0; axis < degree.m(); ++axis)
      if (k[axis] < degree.degrees[axis]) edges.push_back({j, j + grid.strides[axis]});
  }
  for (std::size_t e = 0; e < edges.size(); ++e)
    for (std::size_t g = e + 1; g < edges.size(); ++g) {
      if (edges[e].a == edges[g].a || edges[e].a == edges[g].b || edges[e].b == edges[g].a ||
          edges[e].b == edges[g].b)
        continue;
      if (segments_cross(data.x[perm[edges[e].a]], data.x[perm[edges[e].b]],
                         data.x[perm[edges[g].a]], data.x[perm[edges[g].b]]))
        throw Error(Status::AssignmentError,
                    "induced lattice edges cross near data points " +
                        std::to_string(perm[edges[e].a] + 1) + " and " +
                        std::to_string(perm[edges[g].a] + 1) +
                        "; supply an explicit permutation file");
    }
}

}  // namespace

std::vector<std::size_t> build_assignment(const DataSet& data, const DegreeVector& degree) {
  require(data.m == degree.m(), Status::ShapeError, "data dimension disagrees with degree");
  require(data.size() == degree.N(), Status::ShapeError,
          "need " + std::to_string(degree.N()) + " data points for this degree, got " +
              std::to_string(data.size()));
  const int m = data.m;
  require(m >= 1 && m <= 2, Status::CapabilityError,
          "built-in assignment covers m <= 2; supply a permutation file otherwise");
  const std::size_t N = data.size();
  std::vector<std::size_t> perm(N);

  if (m == 1) {
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::sort(perm.begin(), perm.end(), [&](std::size_t a, std::size_t b) {
      return data.x[a][0] != data.x[b][0] ? data.x[a][0] < data.x[b][0] : a < b;
    });
    verify_no_duplicates(data, perm);
    return perm;
  }

  const std::size_t per_band = static_cast<std::size_t>(degree.degrees[0]) + 1;
  const std::size_t bands = static_cast<std::size_t>(degree.degrees[1]) + 1;
  std::vector<std::size_t> order(N);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (data.x[a][1] != data.x[b][1]) return data.x[a][1] < data.x[b][1];
    if (data.x[a][0] != data.x[b][0]) return data.x[a][0] < data.x[b][0];
    return a < b;
  });
  verify_no_duplicates(data, order);

  const LatticeGrid grid(degree);
  for (std::size_t b = 0; b < bands; ++b) {
    std::vector<std::size_t> band(order.begin() + static_cast<std::ptrdiff_t>(b * per_band),
                                  order.begin() + static_cast<std::ptrdiff_t>((b + 1) * per_band));
    std::sort(band.begin(), band.end(), [&](std::size_t a, std::size_t c) {
      if (data.x[a][0] != data.x[c][0]) return data.x[a][0] < data.x[c][0];
      return a < c;
    });
    for (std::size_t r = 0; r < per_band; ++r) perm[r * grid.strides[0] + b] = band[r];
  }
  verify_edges(data, degree, perm);
  return perm;
}

void verify_assignment(const DataSet& data, const DegreeVector& degree,
                       const std::vector<std::size_t>& perm) {
  require(data.m == degree.m(), Status::ShapeError, "data dimension disagrees with degree");
  require(data.size() == degree.N() && perm.size() == degree.N(), Status::ShapeError,
          "assignment length disagrees with degree");
  std::vector<std::size_t> order(perm);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return data.x[a] < data.x[b];
  });
  verify_no_duplicates(data, order);
  if (data.m == 1) {
    bool asc = true, desc = true;
    for (std::size_t j = 1; j < perm.size(); ++j) {
      asc = asc && data.x[perm[j - 1]][0] < data.x[perm[j]][0];
      desc = desc && data.x[perm[j - 1]][0] > data.x[perm[j]][0];
    }
    require(asc || desc, Status::AssignmentError,
            "assignment must order the points monotonically");
  } else if (data.m == 2) {
    verify_edges(data, degree, perm);
  }
}

namespace {

std::vector<std::vector<int>> axis_permutations(int m) {
  std::vector<int> p(m);
  std::iota(p.begin(), p.end(), 0);
  std::vector<std::vector<int>> all;
  do {
    all.push_back(p);
  } while (std::next_permutation(p.begin(), p.end()));
  return all;
}

std::size_t factorial(int m) {
  std::size_t f = 1;
  for (int i = 2; i <= m; ++i) f *= static_cast<std::size_t>(i);
  return f;
}

// Rank of a permutation in lexicographic order.
std::size_t permutation_rank(const std::vector<int>& p) {
  const int m = static_cast<int>(p.size());
  std::size_t rank = 0;
  for (int i = 0; i < m; ++i) {
    int smaller = 0;
    for (int j = i + 1; j < m; ++j)
      if (p[j] < p[i]) ++smaller;
    rank = rank * static_cast<std::size_t>(m - i) + static_cast<std::size_t>(smaller);
  }
  return rank;
}

}  // namespace

LatticeMap build_lattice_map(const DataSet& data, const DegreeVector& degree,
                             const std::vector<std::size_t>& assignment) {
  require(data.m == degree.m(), Status::ShapeError, "data dimension disagrees with degree");
  require(data.size() == degree.N(), Status::ShapeError, "data count disagrees with degree");
  require(assignment.size() == degree.N(), Status::ShapeError,
          "assignment length disagrees with degree");
  const LatticeGrid grid(degree);
  const int m = degree.m();

  LatticeMap map;
  map.m = m;
  map.degree = degree;
  map.assignment = assignment;

  bool identity = true;
  for (std::size_t j = 0; j < grid.N() && identity; ++j)
    identity = data.x[assignment[j]] == grid.point(j);
  if (identity) {
    map.kind = LatticeMap::Kind::Identity;
    return map;
  }

  map.kind = LatticeMap::Kind::Simplicial;
  const auto perms = axis_permutations(m);

  // Cells in lexicographic order, m! Kuhn simplices per cell; the walk from
  // the cell base adds one axis step per rank of sigma.
  std::vector<int> cell(m, 0);
  bool done = false;
  while (!done) {
    std::size_t base_flat = 0;
    for (int l = 0; l < m; ++l) base_flat += static_cast<std::size_t>(cell[l]) * grid.strides[l];
    for (const auto& sigma : perms) {
      SimplexPiece piece;
      piece.axis_order = sigma;
      piece.lattice_vertices.push_back(base_flat);
      std::size_t walk = base_flat;
      for (int i = 0; i < m; ++i) {
        walk += grid.strides[sigma[static_cast<std::size_t>(i)]];
        piece.lattice_vertices.push_back(walk);
      }
      piece.base_point = grid.point(base_flat);
      piece.base_image = data.x[assignment[base_flat]];
      for (std::size_t v : piece.lattice_vertices)
        piece.image_vertices.push_back(data.x[assignment[v]]);
      piece.A = Mat::Zero(m, m);
      for (int i = 0; i < m; ++i) {
        const int axis = sigma[static_cast<std::size_t>(i)];
        const Vec& prev = piece.image_vertices[static_cast<std::size_t>(i)];
        const Vec& next = piece.image_vertices[static_cast<std::size_t>(i) + 1];
        for (int r = 0; r < m; ++r)
          piece.A(r, axis) = degree.degrees[axis] * (next[r] - prev[r]);
      }
      const double det = piece.A.determinant();
      if (std::abs(det) <= 1e-12) {
        std::string cell_name;
        for (int l = 0; l < m; ++l) cell_name += (l ? "," : "") + std::to_string(cell[l]);
        throw Error(Status::DegenerateError,
                    "degenerate image simplex in cell (" + cell_name + "), axis order rank " +
                        std::to_string(permutation_rank(sigma)));
      }
      piece.A_inv = piece.A.inverse();
      map.pieces.push_back(std::move(piece));
    }
    done = true;
    for (int l = m - 1; l >= 0; --l) {
      if (++cell[l] < degree.degrees[l]) {
        done = false;
        break;
      }
      cell[l] = 0;
    }
  }
  return map;
}

LatticeMap affine_box_map(const Box& box) {
  const int m = box.m();
  require(m >= 1, Status::ShapeError, "box must have at least one axis");
  LatticeMap map;
  map.kind = LatticeMap::Kind::Affine;
  map.m = m;
  map.degree = DegreeVector{std::vector<int>(static_cast<std::size_t>(m), 1)};
  map.affine_offset = box.lo;
  map.affine_scale.resize(m);
  for (int l = 0; l < m; ++l) {
    require(box.lo[l] < box.hi[l], Status::DomainError,
            "degenerate axis " + std::to_string(l + 1) + " in box");
    map.affine_scale[l] = box.hi[l] - box.lo[l];
  }
  return map;
}

namespace {

void check_unit_box(const Vec& x, int m) {
  require(static_cast<int>(x.size()) == m, Status::ShapeError, "point dimension mismatch");
  for (int l = 0; l < m; ++l)
    require(x[l] >= -1e-9 && x[l] <= 1.0 + 1e-9, Status::DomainError,
            "point leaves the unit box on axis " + std::to_string(l + 1));
}

const SimplexPiece& locate_piece(const LatticeMap& map, const Vec& x, Vec* fractional) {
  const int m = map.m;
  std::vector<int> cell(m);
  Vec t(m);
  for (int l = 0; l < m; ++l) {
    const int n = map.degree.degrees[l];
    const double scaled = std::clamp(x[l], 0.0, 1.0) * n;
    const int c = std::min(static_cast<int>(scaled), n - 1);
    cell[l] = c;
    t[l] = scaled - c;
  }
  std::vector<int> sigma(m);
  std::iota(sigma.begin(), sigma.end(), 0);
  std::sort(sigma.begin(), sigma.end(), [&](int a, int b) {
    return t[a] != t[b] ? t[a] > t[b] : a < b;
  });
  std::size_t cell_flat = 0;
  for (int l = 0; l < m; ++l) {
    std::size_t stride = 1;
    for (int p = l + 1; p < m; ++p) stride *= static_cast<std::size_t>(map.degree.degrees[p]);
    cell_flat += static_cast<std::size_t>(cell[l]) * stride;
  }
  if (fractional) *fractional = t;
  return map.pieces[cell_flat * factorial(m) + permutation_rank(sigma)];
}

}  // namespace

Vec eval_piece(const SimplexPiece& piece, const Vec& x) {
  const int m = static_cast<int>(x.size());
  Vec out = piece.base_image;
  for (int r = 0; r < m; ++r)
    for (int c = 0; c < m; ++c) out[r] += piece.A(r, c) * (x[c] - piece.base_point[c]);
  return out;
}

Vec eval_S(const LatticeMap& map, const Vec& x) {
  check_unit_box(x, map.m);
  switch (map.kind) {
    case LatticeMap::Kind::Identity:
      return x;
    case LatticeMap::Kind::Affine: {
      Vec out(map.m);
      for (int l = 0; l < map.m; ++l) out[l] = map.affine_offset[l] + map.affine_scale[l] * x[l];
      return out;
    }
    case LatticeMap::Kind::Simplicial:
      return eval_piece(locate_piece(map, x, nullptr), x);
  }
  throw Error(Status::ConfigError, "unreachable lattice map kind");
}

Vec eval_S_inverse(const LatticeMap& map, const Vec& y) {
  require(static_cast<int>(y.size()) == map.m, Status::ShapeError, "point dimension mismatch");
  const int m = map.m;
  const auto in_unit = [m](const Vec& p) {
    for (int l = 0; l < m; ++l)
      if (p[l] < -1e-9 || p[l] > 1.0 + 1e-9) return false;
    return true;
  };
  switch (map.kind) {
    case LatticeMap::Kind::Identity:
      require(in_unit(y), Status::OutOfHull, "point outside the image of the lattice map");
      return y;
    case LatticeMap::Kind::Affine: {
      Vec out(m);
      for (int l = 0; l < m; ++l) out[l] = (y[l] - map.affine_offset[l]) / map.affine_scale[l];
      require(in_unit(out), Status::OutOfHull, "point outside the image of the lattice map");
      return out;
    }
    case LatticeMap::Kind::Simplicial:
      break;
  }

  // Brute scan over the image simplices, strict tolerance first, then a
  // marginal one for points pushed just outside by roundoff.
  for (const double tol : {1e-12, 1e-6}) {
    for (const SimplexPiece& piece : map.pieces) {
      Vec u(m, 0.0);
      for (int r = 0; r < m; ++r) {
        double acc = 0.0;
        for (int c = 0; c < m; ++c) acc += piece.A_inv(r, c) * (y[c] - piece.base_image[c]);
        u[r] = acc;
      }
      Vec t(m);
      for (int l = 0; l < m; ++l) t[l] = map.degree.degrees[l] * u[l];
      const std::vector<int>& sigma = piece.axis_order;
      bool inside = 1.0 - t[sigma[0]] >= -tol && t[sigma[static_cast<std::size_t>(m) - 1]] >= -tol;
      for (int i = 0; inside && i + 1 < m; ++i)
        inside = t[sigma[static_cast<std::size_t>(i)]] - t[sigma[static_cast<std::size_t>(i) + 1]] >=
                 -tol;
      if (!inside) continue;
      Vec x(m);
      for (int l = 0; l < m; ++l)
        x[l] = std::clamp(piece.base_point[l] + u[l], 0.0, 1.0);
      return x;
    }
  }
  throw Error(Status::OutOfHull, "point outside the image of the lattice map");
}

LipschitzData lipschitz_of_S(const LatticeMap& map) {
  LipschitzData lip;
  lip.partial.assign(static_cast<std::size_t>(map.m), 0.0);
  switch (map.kind) {
    case LatticeMap::Kind::Identity:
      lip.full = 1.0;
      lip.partial.assign(static_cast<std::size_t>(map.m), 1.0);
      return lip;
    case LatticeMap::Kind::Affine:
      for (int l = 0; l < map.m; ++l) {
        lip.partial[static_cast<std::size_t>(l)] = std::abs(map.affine_scale[l]);
        lip.full = std::max(lip.full, std::abs(map.affine_scale[l]));
      }
      return lip;
    case LatticeMap::Kind::Simplicial:
      break;
  }
  for (const SimplexPiece& piece : map.pieces) {
    const Eigen::JacobiSVD<Mat> svd(piece.A);
    lip.full = std::max(lip.full, svd.singularValues()(0));
    for (int l = 0; l < map.m; ++l)
      lip.partial[static_cast<std::size_t>(l)] =
          std::max(lip.partial[static_cast<std::size_t>(l)], piece.A.col(l).norm());
  }
  return lip;
}

KoopmanMatrices build_data_koopman(const DataSet& data, const DegreeVector& degree,
                                   const LatticeMap& map) {
  require(data.m == degree.m() && map.m == degree.m(), Status::ShapeError,
          "dimension mismatch between data, degree, and lattice map");
  require(data.size() == degree.N(), Status::ShapeError, "data count disagrees with degree");
  require(map.assignment.size() == degree.N(), Status::ShapeError,
          "lattice map carries no assignment for this degree");
  std::vector<Vec> pulled(degree.N());
  for (std::size_t j = 0; j < degree.N(); ++j) {
    try {
      pulled[j] = eval_S_inverse(map, data.y[map.assignment[j]]);
    } catch (const Error& e) {
      if (e.status != Status::OutOfHull) throw;
      throw Error(Status::OutOfHull, "image of data pair " +
                                         std::to_string(map.assignment[j] + 1) +
                                         " lies outside the lattice map's hull");
    }
  }
  return koopman_from_images(pulled, degree);
}

std::vector<Vec> predict_data_driven(const KoopmanMatrices& km, const LatticeMap& map,
                                     const Vec& x0, int steps, bool relift) {
  const Vec pulled = eval_S_inverse(map, x0);
  const std::vector<Vec> states =
      relift ? predict_trajectory_relift(km, pulled, steps) : predict_trajectory(km, pulled, steps);
  std::vector<Vec> out;
  out.reserve(states.size());
  for (const Vec& s : states) {
    Vec clamped = s;
    for (double& v : clamped) v = std::clamp(v, 0.0, 1.0);
    out.push_back(eval_S(map, clamped));
  }
  return out;
}

}  // namespace bernkoop
