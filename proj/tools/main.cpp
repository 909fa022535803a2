#include <bernkoop/bernkoop.h>

#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

namespace {

// Exit contract: 0 success, 2 configuration or file problems, 3 numeric
// failures (escape, out-of-hull, assignment, rank).
struct CliError {
  int exit_code;
  std::string message;
};

int exit_code_for(int status) {
  return (status == BK_CONFIG_ERROR || status == BK_IO_ERROR) ? 2 : 3;
}

void check(int status) {
  if (status != BK_OK)
    throw CliError{exit_code_for(status),
                   std::string(bk_status_name(status)) + ": " + bk_last_error()};
}

void fail_config(const std::string& message) { throw CliError{2, message}; }

template <typename T, void (*Free)(T*)>
struct Handle {
  T* ptr = nullptr;
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  Handle(Handle&& other) noexcept : ptr(other.ptr) { other.ptr = nullptr; }
  ~Handle() {
    if (ptr) Free(ptr);
  }
  T** out() { return &ptr; }
  T* get() const { return ptr; }
};

using System = Handle<bk_system, bk_system_free>;
using ObservableH = Handle<bk_observable, bk_observable_free>;
using Koopman = Handle<bk_koopman, bk_koopman_free>;
using Dataset = Handle<bk_dataset, bk_dataset_free>;
using Lattice = Handle<bk_lattice, bk_lattice_free>;
using Edmd = Handle<bk_edmd, bk_edmd_free>;
using Bounds = Handle<bk_bounds, bk_bounds_free>;

// Shortest round-trip decimal form keeps outputs bit-identical across runs.
std::string fmt(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string join(const std::vector<double>& v, char sep = ',') {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += sep;
    s += fmt(v[i]);
  }
  return s;
}

std::string join_int(const std::vector<int>& v, char sep = ',') {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += sep;
    s += std::to_string(v[i]);
  }
  return s;
}

class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_.good()) fail_config("cannot open output file " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }
  void line(const std::string& s) { stream() << s << '\n'; }

 private:
  std::ofstream file_;
};

struct Options {
  std::string system = "van_der_pol";
  std::vector<std::vector<int>> degrees;
  std::string observable;
  int steps = 10;
  double sigma = 0.0;
  std::uint64_t seed = 0;
  std::string data_file;
  std::string perm_file;
  std::string bounds_list;
  std::string out_file;
  std::vector<double> x0;
  std::string x0_frame = "unit";
  double edmd_tol = 1e-10;
};

System open_system(const Options& opt) {
  System s;
  const bool is_file = opt.system.find('.') != std::string::npos ||
                       opt.system.find('/') != std::string::npos;
  check(is_file ? bk_system_from_config(opt.system.c_str(), s.out())
                : bk_system_builtin(opt.system.c_str(), s.out()));
  return s;
}

std::vector<int> single_degree(const Options& opt, int m) {
  if (opt.degrees.empty()) fail_config("--degree is required for this command");
  if (opt.degrees.size() > 1) fail_config("this command takes a single --degree");
  std::vector<int> deg = opt.degrees[0];
  if (deg.size() == 1 && m > 1) deg.assign(m, deg[0]);
  if (static_cast<int>(deg.size()) != m)
    fail_config("--degree needs one entry (applied to every axis) or one per dimension");
  return deg;
}

std::vector<double> unit_x0(const Options& opt, const System& s, int m) {
  std::vector<double> x0 = opt.x0;
  if (x0.empty()) fail_config("--x0 is required for this command");
  if (static_cast<int>(x0.size()) != m) fail_config("--x0 needs one value per dimension");
  if (opt.x0_frame == "native") {
    std::vector<double> u(m);
    check(bk_system_to_unit(s.get(), x0.data(), u.data()));
    return u;
  }
  return x0;
}

std::string config_comment(const std::string& cmd, const Options& opt) {
  std::string s = "# config: cmd=" + cmd + " system=" + opt.system;
  for (const auto& d : opt.degrees) s += " degree=" + join_int(d);
  if (!opt.observable.empty()) s += " observable=" + opt.observable;
  s += " steps=" + std::to_string(opt.steps);
  s += " sigma=" + fmt(opt.sigma);
  s += " seed=" + std::to_string(opt.seed);
  if (!opt.data_file.empty()) s += " data=" + opt.data_file;
  if (!opt.perm_file.empty()) s += " perm=" + opt.perm_file;
  if (!opt.bounds_list.empty()) s += " bounds=" + opt.bounds_list;
  if (!opt.x0.empty()) s += " x0=" + join(opt.x0) + " x0-frame=" + opt.x0_frame;
  if (!opt.data_file.empty()) s += " edmd-tol=" + fmt(opt.edmd_tol);
  return s;
}

std::vector<double> true_trajectory(const System& s, std::vector<double> x, int steps) {
  const int m = bk_system_dim(s.get());
  std::vector<double> traj(static_cast<std::size_t>(steps) * m);
  for (int k = 0; k < steps; ++k) {
    std::vector<double> y(m);
    check(bk_system_eval(s.get(), x.data(), y.data()));
    std::copy(y.begin(), y.end(), traj.begin() + static_cast<std::size_t>(k) * m);
    x = y;
  }
  return traj;
}

double euclidean_error(const double* a, const double* b, int m) {
  double e2 = 0.0;
  for (int l = 0; l < m; ++l) e2 += (a[l] - b[l]) * (a[l] - b[l]);
  return std::sqrt(e2);
}

int run_approximate(const Options& opt) {
  System s = open_system(opt);
  const int m = bk_system_dim(s.get());
  if (opt.observable.empty()) fail_config("--observable is required");
  ObservableH f;
  check(bk_observable_parse(opt.observable.c_str(), m, f.out()));
  const std::vector<int> deg = single_degree(opt, m);
  Koopman km;
  check(bk_koopman_build(s.get(), deg.data(), deg.size(), km.out()));

  const int per_axis = m == 1 ? 401 : (m == 2 ? 41 : 11);
  std::vector<int> idx(m, 0);
  Output out(opt.out_file);
  out.line(config_comment("approximate", opt));
  std::string header;
  for (int l = 0; l < m; ++l) header += "x" + std::to_string(l + 1) + ",";
  out.line(header + "true,approx,abs_error");
  double sup = 0.0;
  bool done = false;
  while (!done) {
    std::vector<double> x(m);
    for (int l = 0; l < m; ++l) x[l] = static_cast<double>(idx[l]) / (per_axis - 1);
    std::vector<double> y(m);
    check(bk_system_eval(s.get(), x.data(), y.data()));
    double truth = 0.0, approx = 0.0;
    check(bk_observable_eval(f.get(), y.data(), &truth));
    check(bk_koopman_apply(km.get(), f.get(), x.data(), &approx));
    const double err = std::abs(truth - approx);
    sup = std::max(sup, err);
    out.line(join(x) + "," + fmt(truth) + "," + fmt(approx) + "," + fmt(err));
    done = true;
    for (int l = m - 1; l >= 0; --l) {
      if (++idx[l] < per_axis) {
        done = false;
        break;
      }
      idx[l] = 0;
    }
  }
  out.line("# sup_error=" + fmt(sup));
  return 0;
}

int run_predict(const Options& opt) {
  System s = open_system(opt);
  const int m = bk_system_dim(s.get());
  const std::vector<int> deg = single_degree(opt, m);
  const std::vector<double> x0 = unit_x0(opt, s, m);
  Koopman km;
  check(bk_koopman_build(s.get(), deg.data(), deg.size(), km.out()));
  std::vector<double> pred(static_cast<std::size_t>(opt.steps) * m);
  check(bk_koopman_predict(km.get(), x0.data(), opt.steps, 0, pred.data()));
  const std::vector<double> truth = true_trajectory(s, x0, opt.steps);

  Output out(opt.out_file);
  out.line(config_comment("predict", opt));
  std::string header = "step";
  for (int l = 0; l < m; ++l) header += ",pred" + std::to_string(l + 1);
  for (int l = 0; l < m; ++l) header += ",true" + std::to_string(l + 1);
  out.line(header + ",error");
  for (int k = 0; k < opt.steps; ++k) {
    const double* p = pred.data() + static_cast<std::size_t>(k) * m;
    const double* t = truth.data() + static_cast<std::size_t>(k) * m;
    std::string row = std::to_string(k + 1);
    for (int l = 0; l < m; ++l) row += "," + fmt(p[l]);
    for (int l = 0; l < m; ++l) row += "," + fmt(t[l]);
    out.line(row + "," + fmt(euclidean_error(p, t, m)));
  }
  return 0;
}

std::vector<std::vector<int>> sweep_degrees(const Options& opt, int m) {
  if (!opt.degrees.empty()) {
    std::vector<std::vector<int>> sweep;
    for (const auto& d : opt.degrees) {
      std::vector<int> deg = d;
      if (deg.size() == 1 && m > 1) deg.assign(m, deg[0]);
      if (static_cast<int>(deg.size()) != m)
        fail_config("--degree needs one entry or one per dimension");
      sweep.push_back(deg);
    }
    return sweep;
  }
  std::vector<std::vector<int>> sweep;
  for (int n : {10, 15, 20, 30, 40, 60, 80, 120, 160, 240, 320, 400})
    sweep.push_back(std::vector<int>(m, n));
  return sweep;
}

int run_bounds(const Options& opt) {
  System s = open_system(opt);
  const int m = bk_system_dim(s.get());
  if (opt.observable.empty()) fail_config("--observable is required");
  ObservableH f;
  check(bk_observable_parse(opt.observable.c_str(), m, f.out()));

  std::vector<std::string> tags;
  {
    std::string list = opt.bounds_list;
    if (list.empty()) list = m == 1 ? "T1,T2,Measured" : "T3,T4,T5,Measured";
    std::stringstream ss(list);
    std::string tag;
    while (std::getline(ss, tag, ','))
      if (!tag.empty()) tags.push_back(tag);
  }
  static const std::set<std::string> known = {"T1",  "T2",  "T3",   "T4",       "T5",
                                             "T6a", "T6b", "T6c",  "AppA",     "MeasNoise",
                                             "DataFull", "DataPartial", "Measured"};
  for (const auto& t : tags)
    if (!known.count(t)) fail_config("unknown bound tag " + t);

  Bounds ctx;
  check(bk_bounds_create(s.get(), f.get(), 0, ctx.out()));

  const bool wants_iterated =
      std::any_of(tags.begin(), tags.end(), [](const std::string& t) { return t[0] == 'T' && t.size() == 3; });
  const bool wants_data = std::any_of(tags.begin(), tags.end(), [](const std::string& t) {
    return t == "DataFull" || t == "DataPartial";
  });
  Lattice S;
  Dataset data;
  if (wants_data) {
    if (opt.data_file.empty()) fail_config("DataFull/DataPartial need --data");
    check(bk_dataset_load_csv(opt.data_file.c_str(), data.out()));
  }

  double noise_sup = 0.0;

  Output out(opt.out_file);
  out.line(config_comment("bounds", opt));
  out.line("tag,k,degrees,value,clamped,constants");
  char constants[512];
  for (const auto& deg : sweep_degrees(opt, m)) {
    Koopman km;
    Lattice lat;
    for (const auto& tag : tags) {
      bk_bound_result r{};
      constants[0] = '\0';
      int k_used = 1;
      if (tag == "Measured") {
        double err = 0.0;
        check(bk_bounds_measured(ctx.get(), deg.data(), deg.size(), 1, &err));
        out.line("Measured,1," + join_int(deg, '|') + "," + fmt(err) + ",0,");
        continue;
      }
      if (tag == "T6a" || tag == "T6b" || tag == "T6c") {
        if (!km.get()) check(bk_koopman_build(s.get(), deg.data(), deg.size(), km.out()));
        check(bk_bound_iterated(ctx.get(), tag.c_str(), km.get(), opt.steps, &r, constants,
                                sizeof constants));
        k_used = opt.steps;
      } else if (tag == "AppA") {
        check(bk_bound_alternative(ctx.get(), deg.data(), deg.size(), opt.steps, &r, constants,
                                   sizeof constants));
        k_used = opt.steps;
      } else if (tag == "MeasNoise") {
        if (noise_sup == 0.0 && opt.sigma > 0.0) {
          Dataset lattice_data;
          check(bk_dataset_generate_lattice(s.get(), deg.data(), deg.size(), lattice_data.out()));
          check(bk_dataset_add_noise(lattice_data.get(), opt.sigma, opt.seed, &noise_sup));
        }
        check(bk_bound_noise(ctx.get(), noise_sup, &r, constants, sizeof constants));
      } else if (tag == "DataFull" || tag == "DataPartial") {
        if (!lat.get()) {
          if (!opt.perm_file.empty()) {
            std::size_t n = 0;
            check(bk_dataset_size(data.get(), &n));
            std::vector<int> perm(n);
            check(bk_permutation_load_csv(opt.perm_file.c_str(), n, perm.data()));
            check(bk_lattice_build_perm(data.get(), deg.data(), deg.size(), perm.data(),
                                        lat.out()));
          } else {
            check(bk_lattice_build(data.get(), deg.data(), deg.size(), lat.out()));
          }
        }
        bk_bound_result full{}, part{};
        check(bk_bound_data(ctx.get(), lat.get(), deg.data(), deg.size(), &full, &part,
                            constants, sizeof constants));
        r = tag == "DataFull" ? full : part;
      } else {
        check(bk_bound_single(ctx.get(), tag.c_str(), deg.data(), deg.size(), &r, constants,
                              sizeof constants));
      }
      out.line(tag + "," + std::to_string(k_used) + "," + join_int(deg, '|') + "," +
               fmt(r.value) + "," + std::to_string(r.clamped) + "," + constants);
    }
    (void)wants_iterated;
  }
  return 0;
}

int run_datadriven(const Options& opt) {
  System s = open_system(opt);
  const int m = bk_system_dim(s.get());
  if (opt.data_file.empty()) fail_config("--data is required");
  const std::vector<int> deg = single_degree(opt, m);
  const std::vector<double> x0 = unit_x0(opt, s, m);

  Dataset data;
  check(bk_dataset_load_csv(opt.data_file.c_str(), data.out()));
  if (bk_dataset_dim(data.get()) != m) fail_config("data file dimension mismatch");
  std::size_t n = 0;
  check(bk_dataset_size(data.get(), &n));

  std::vector<int> perm;
  if (!opt.perm_file.empty()) {
    perm.resize(n);
    check(bk_permutation_load_csv(opt.perm_file.c_str(), n, perm.data()));
  }

  const auto build_pair = [&](const Dataset& d, std::vector<double>& bern,
                              std::vector<double>& edmd, int* rank) {
    Lattice S;
    if (!perm.empty())
      check(bk_lattice_build_perm(d.get(), deg.data(), deg.size(), perm.data(), S.out()));
    else
      check(bk_lattice_build(d.get(), deg.data(), deg.size(), S.out()));
    Koopman km;
    check(bk_data_koopman_build(d.get(), deg.data(), deg.size(), S.get(), km.out()));
    check(bk_data_predict(km.get(), S.get(), x0.data(), opt.steps, 0, bern.data()));
    Edmd em;
    check(bk_edmd_build(d.get(), deg.data(), deg.size(), opt.edmd_tol, em.out()));
    *rank = bk_edmd_rank(em.get());
    check(bk_edmd_predict(em.get(), x0.data(), opt.steps, edmd.data()));
  };

  const std::size_t len = static_cast<std::size_t>(opt.steps) * m;
  std::vector<double> bern(len), edmd(len);
  int rank = 0;
  build_pair(data, bern, edmd, &rank);

  std::vector<double> bern_noisy, edmd_noisy;
  int rank_noisy = 0;
  if (opt.sigma > 0.0) {
    Dataset noisy;
    check(bk_dataset_load_csv(opt.data_file.c_str(), noisy.out()));
    double sup = 0.0;
    check(bk_dataset_add_noise(noisy.get(), opt.sigma, opt.seed, &sup));
    bern_noisy.resize(len);
    edmd_noisy.resize(len);
    build_pair(noisy, bern_noisy, edmd_noisy, &rank_noisy);
  }

  const std::vector<double> truth = true_trajectory(s, x0, opt.steps);

  Output out(opt.out_file);
  out.line(config_comment("datadriven", opt));
  out.line("# edmd_rank=" + std::to_string(rank) +
           (opt.sigma > 0.0 ? " edmd_rank_noisy=" + std::to_string(rank_noisy) : ""));
  std::string header = "step";
  for (int l = 0; l < m; ++l) header += ",true" + std::to_string(l + 1);
  for (int l = 0; l < m; ++l) header += ",bern" + std::to_string(l + 1);
  header += ",bern_error";
  for (int l = 0; l < m; ++l) header += ",edmd" + std::to_string(l + 1);
  header += ",edmd_error";
  if (opt.sigma > 0.0) {
    for (int l = 0; l < m; ++l) header += ",bern_noisy" + std::to_string(l + 1);
    header += ",bern_noisy_error";
    for (int l = 0; l < m; ++l) header += ",edmd_noisy" + std::to_string(l + 1);
    header += ",edmd_noisy_error";
  }
  out.line(header);
  for (int k = 0; k < opt.steps; ++k) {
    const double* t = truth.data() + static_cast<std::size_t>(k) * m;
    const auto append = [&](std::string& row, const std::vector<double>& traj) {
      const double* p = traj.data() + static_cast<std::size_t>(k) * m;
      for (int l = 0; l < m; ++l) row += "," + fmt(p[l]);
      row += "," + fmt(euclidean_error(p, t, m));
    };
    std::string row = std::to_string(k + 1);
    for (int l = 0; l < m; ++l) row += "," + fmt(t[l]);
    append(row, bern);
    append(row, edmd);
    if (opt.sigma > 0.0) {
      append(row, bern_noisy);
      append(row, edmd_noisy);
    }
    out.line(row);
  }
  return 0;
}

int run_table2(const Options& opt) {
  System s = open_system(opt);
  const int m = bk_system_dim(s.get());
  std::vector<double> x0 = opt.x0;
  if (x0.empty()) x0.assign({0.4, 0.0});
  if (static_cast<int>(x0.size()) != m) fail_config("--x0 needs one value per dimension");
  if (opt.x0_frame == "native") {
    std::vector<double> u(m);
    check(bk_system_to_unit(s.get(), x0.data(), u.data()));
    x0 = u;
  }

  Output out(opt.out_file);
  out.line(config_comment("table2", opt));
  out.line("n,sigma,mean_error");
  for (int n : {10, 20, 25}) {
    const std::vector<int> deg(m, n);
    for (double sigma : {0.0, 0.001, 0.01, 0.1}) {
      double total = 0.0;
      const int runs = sigma == 0.0 ? 1 : 50;
      for (int i = 0; i < runs; ++i) {
        double err = 0.0;
        check(bk_noisy_one_step_error(s.get(), deg.data(), deg.size(), x0.data(), sigma,
                                      opt.seed + static_cast<std::uint64_t>(i), &err));
        total += err;
      }
      out.line(std::to_string(n) + "," + fmt(sigma) + "," + fmt(total / runs));
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  if (const char* threads = std::getenv("KB_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(threads, &end, 10);
    if (end == threads || *end != '\0' || v < 1) {
      std::cerr << "error: KB_THREADS must be a positive integer\n";
      return 2;
    }
  }

  CLI::App app{
      "Polynomial approximation of composition operators: build, predict, bound, compare"};
  app.require_subcommand(1);
  Options opt;

  const auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--system", opt.system,
                    "builtin name (van_der_pol, scalar_logistic, product_decay_2d, "
                    "lotka_volterra) or JSON config path");
    cmd->add_option("--degree", opt.degrees,
                    "per-axis degrees n1[,n2,...]; repeatable for sweeps")
        ->delimiter(',');
    cmd->add_option("--out", opt.out_file, "output CSV path (default stdout)");
  };

  CLI::App* approximate =
      app.add_subcommand("approximate", "compare the operator approximation on a dense grid");
  add_common(approximate);
  approximate->add_option("--observable", opt.observable, "expression over x1..xm");

  CLI::App* predict = app.add_subcommand("predict", "iterate the matrix approximation from x0");
  add_common(predict);
  predict->add_option("--steps", opt.steps, "number of prediction steps");
  predict->add_option("--x0", opt.x0, "initial condition")->delimiter(',');
  predict->add_option("--x0-frame", opt.x0_frame, "unit or native")
      ->check(CLI::IsMember({"unit", "native"}));

  CLI::App* bounds = app.add_subcommand("bounds", "certified error bounds across degrees");
  add_common(bounds);
  bounds->add_option("--observable", opt.observable, "expression over x1..xm");
  bounds->add_option("--bounds", opt.bounds_list,
                     "comma list: T1,T2,T3,T4,T5,T6a,T6b,T6c,AppA,MeasNoise,DataFull,"
                     "DataPartial,Measured");
  bounds->add_option("--steps", opt.steps, "iterate count for T6*/AppA");
  bounds->add_option("--sigma", opt.sigma, "noise level for MeasNoise");
  bounds->add_option("--seed", opt.seed, "noise seed");
  bounds->add_option("--data", opt.data_file, "dataset CSV for DataFull/DataPartial");
  bounds->add_option("--perm", opt.perm_file, "assignment file for the lattice map");

  CLI::App* datadriven =
      app.add_subcommand("datadriven", "scattered-data prediction vs the least-squares baseline");
  add_common(datadriven);
  datadriven->add_option("--data", opt.data_file, "dataset CSV (x1..xm,y1..ym rows)");
  datadriven->add_option("--perm", opt.perm_file, "single-column 1-based assignment file");
  datadriven->add_option("--steps", opt.steps, "number of prediction steps");
  datadriven->add_option("--sigma", opt.sigma, "image noise level for the noisy run");
  datadriven->add_option("--seed", opt.seed, "noise seed");
  datadriven->add_option("--x0", opt.x0, "initial condition")->delimiter(',');
  datadriven->add_option("--x0-frame", opt.x0_frame, "unit or native")
      ->check(CLI::IsMember({"unit", "native"}));
  datadriven->add_option("--edmd-tol", opt.edmd_tol,
                         "relative singular-value truncation for the baseline");

  CLI::App* table2 =
      app.add_subcommand("table2", "one-step error vs noise level, 50-seed averages");
  add_common(table2);
  table2->add_option("--seed", opt.seed, "base seed for the averages");
  table2->add_option("--x0", opt.x0, "initial condition (default 0.4,0)")->delimiter(',');
  table2->add_option("--x0-frame", opt.x0_frame, "unit or native")
      ->check(CLI::IsMember({"unit", "native"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (approximate->parsed()) return run_approximate(opt);
    if (predict->parsed()) return run_predict(opt);
    if (bounds->parsed()) return run_bounds(opt);
    if (datadriven->parsed()) return run_datadriven(opt);
    return run_table2(opt);
  } catch (const CliError& e) {
    std::cerr << "error: " << e.message << '\n';
    return e.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
