#include "kslearn/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "kslearn/error.hpp"

namespace kslearn {

namespace fs = std::filesystem;

json to_json(const KernelSpec& spec) {
  json reg;
  if (spec.has_cutoff())
    reg["cutoff"] = spec.r_c();
  else
    reg["epsilon"] = spec.eps();
  return json{{"d", spec.d}, {"chi", spec.chi}, {"regularization", reg},
              {"m", spec.m}, {"h", spec.h}};
}

KernelSpec kernel_from_json(const json& j) {
  KernelSpec spec;
  try {
    spec.d = j.at("d").get<int>();
    spec.chi = j.at("chi").get<double>();
    spec.m = j.value("m", 1);
    spec.h = j.value("h", 0.01);
    const json& reg = j.at("regularization");
    if (reg.contains("cutoff"))
      spec.reg = Cutoff{reg.at("cutoff").get<double>()};
    else
      spec.reg = Epsilon{reg.at("epsilon").get<double>()};
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad kernel specification: ") + e.what());
  }
  spec.validate();
  return spec;
}

json to_json(const SplineModel& model) {
  return json{{"breakpoints", model.partition().breakpoints()},
              {"degree", model.partition().degree()},
              {"coefficients", model.coefficients()}};
}

SplineModel spline_from_json(const json& j) {
  try {
    return SplineModel(Partition(j.at("breakpoints").get<std::vector<double>>(),
                                 j.at("degree").get<int>()),
                       j.at("coefficients").get<std::vector<double>>());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad spline model: ") + e.what());
  }
}

json to_json(const LinearSystem& system) {
  const auto n = system.A.rows();
  std::vector<double> a;
  a.reserve(static_cast<std::size_t>(n * n));
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < n; ++c)
      a.push_back(system.A(r, c));
  return json{{"n", n},
              {"A", a},
              {"b", std::vector<double>(system.b.data(), system.b.data() + n)}};
}

void write_json(const fs::path& path, const json& j) {
  if (path.has_parent_path())
    fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out)
    throw IoError("cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
  if (!out)
    throw IoError("failed writing " + path.string());
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in)
    throw IoError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw IoError("cannot parse " + path.string() + ": " + e.what());
  }
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw IoError("malformed number '" + std::string(text) + "'");
  return v;
}

namespace {

fs::path trajectory_file(const fs::path& dir, std::size_t m) {
  char name[32];
  std::snprintf(name, sizeof name, "traj_%05zu.csv", m);
  return dir / name;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(sep, start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos)
      break;
    start = pos + 1;
  }
  return out;
}

} // namespace

void write_dataset(const TrajectoryDataset& data, const fs::path& dir) {
  data.validate();
  fs::create_directories(dir);
  const DistanceRange range = pairwise_distance_range(data);
  const DatasetMetadata& md = data.metadata;
  json meta{{"format_version", kDatasetFormatVersion},
            {"mode", to_string(md.mode)},
            {"kernel", to_json(md.kernel)},
            {"eta", md.eta},
            {"seed", md.seed},
            {"tau", md.tau},
            {"dt_obs", md.dt_obs},
            {"T", md.T},
            {"M", data.M()},
            {"L", data.L()},
            {"N", data.N()},
            {"d", data.d()},
            {"a", range.min},
            {"b", range.max},
            {"profile_model", md.profile_model ? to_json(*md.profile_model) : json(nullptr)}};
  try {
    meta["config"] = json::parse(md.config_echo);
  } catch (const json::exception&) {
    meta["config"] = md.config_echo;
  }
  write_json(dir / "metadata.json", meta);

  const int d = data.d();
  for (std::size_t m = 0; m < data.M(); ++m) {
    const fs::path path = trajectory_file(dir, m);
    std::ofstream out(path);
    if (!out)
      throw IoError("cannot open " + path.string() + " for writing");
    out << "l,t,i";
    for (int k = 1; k <= d; ++k)
      out << ",x_" << k;
    out << '\n';
    const auto& frames = data.trajectories[m].frames;
    for (std::size_t l = 0; l < frames.size(); ++l) {
      const std::string t = format_double(data.times[l]);
      for (std::size_t i = 0; i < frames[l].size(); ++i) {
        out << l << ',' << t << ',' << i;
        for (int k = 0; k < d; ++k)
          out << ',' << format_double(frames[l](i, k));
        out << '\n';
      }
    }
    if (!out)
      throw IoError("failed writing " + path.string());
  }
}

TrajectoryDataset read_dataset(const fs::path& dir) {
  if (!fs::is_directory(dir))
    throw IoError("dataset directory " + dir.string() + " does not exist");
  const json meta = read_json(dir / "metadata.json");
  TrajectoryDataset data;
  std::size_t M = 0;
  std::size_t L = 0;
  std::size_t N = 0;
  int d = 0;
  try {
    if (meta.at("format_version").get<int>() != kDatasetFormatVersion)
      throw IoError("unsupported dataset format version");
    DatasetMetadata& md = data.metadata;
    md.mode = mode_from_string(meta.at("mode").get<std::string>());
    md.kernel = kernel_from_json(meta.at("kernel"));
    md.eta = meta.at("eta").get<double>();
    md.seed = meta.at("seed").get<std::uint64_t>();
    md.tau = meta.at("tau").get<double>();
    md.dt_obs = meta.at("dt_obs").get<double>();
    md.T = meta.at("T").get<double>();
    if (!meta.at("profile_model").is_null())
      md.profile_model = spline_from_json(meta.at("profile_model"));
    const json& cfg = meta.at("config");
    md.config_echo = cfg.is_string() ? cfg.get<std::string>() : cfg.dump();
    M = meta.at("M").get<std::size_t>();
    L = meta.at("L").get<std::size_t>();
    N = meta.at("N").get<std::size_t>();
    d = meta.at("d").get<int>();
  } catch (const json::exception& e) {
    throw IoError(std::string("bad dataset metadata: ") + e.what());
  }

  data.times.assign(L + 1, 0.0);
  data.trajectories.resize(M);
  for (std::size_t m = 0; m < M; ++m) {
    const fs::path path = trajectory_file(dir, m);
    std::ifstream in(path);
    if (!in)
      throw IoError("missing trajectory file " + path.string());
    auto& frames = data.trajectories[m].frames;
    frames.assign(L + 1, ParticleConfiguration(d, N));
    std::string line;
    std::getline(in, line); // header
    std::size_t rows = 0;
    while (std::getline(in, line)) {
      if (line.empty())
        continue;
      const auto cols = split(line, ',');
      if (cols.size() != static_cast<std::size_t>(3 + d))
        throw IoError(path.string() + ": wrong column count");
      const auto l = static_cast<std::size_t>(parse_double(cols[0]));
      const auto i = static_cast<std::size_t>(parse_double(cols[2]));
      if (l > L || i >= N)
        throw IoError(path.string() + ": index out of range");
      data.times[l] = parse_double(cols[1]);
      for (int k = 0; k < d; ++k)
        frames[l](i, k) = parse_double(cols[static_cast<std::size_t>(3 + k)]);
      ++rows;
    }
    if (rows != (L + 1) * N)
      throw IoError(path.string() + ": expected " + std::to_string((L + 1) * N) + " rows");
  }
  data.validate();
  return data;
}

namespace {

std::ofstream open_csv(const fs::path& path) {
  if (path.has_parent_path())
    fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out)
    throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

} // namespace

void write_profile_csv(const fs::path& path, const EmpiricalDensity& density,
                       const std::function<double(double)>& truth, const SplineModel& learned) {
  auto out = open_csv(path);
  out << "r,truth,learned\n";
  for (std::size_t k = 0; k <= density.bins(); ++k) {
    const double r = density.edge(k);
    out << format_double(r) << ',' << format_double(truth(r)) << ','
        << format_double(learned(r)) << '\n';
  }
  if (!out)
    throw IoError("failed writing " + path.string());
}

void write_density_csv(const fs::path& path, const EmpiricalDensity& density) {
  auto out = open_csv(path);
  out << "bin,left,right,center,weight\n";
  for (std::size_t k = 0; k < density.bins(); ++k)
    out << k << ',' << format_double(density.edge(k)) << ',' << format_double(density.edge(k + 1))
        << ',' << format_double(density.center(k)) << ',' << format_double(density.weights[k])
        << '\n';
  if (!out)
    throw IoError("failed writing " + path.string());
}

void write_trajectories_csv(const fs::path& path, const TrajectoryDataset& reference,
                            const TrajectoryDataset& reconstructed) {
  auto out = open_csv(path);
  const int d = reference.d();
  out << "m,l,t,i,source";
  for (int k = 1; k <= d; ++k)
    out << ",x_" << k;
  out << '\n';
  const auto emit = [&](const TrajectoryDataset& data, const char* source) {
    for (std::size_t m = 0; m < data.M(); ++m)
      for (std::size_t l = 0; l <= data.L(); ++l) {
        const auto& x = data.trajectories[m].frames[l];
        for (std::size_t i = 0; i < x.size(); ++i) {
          out << m << ',' << l << ',' << format_double(data.times[l]) << ',' << i << ','
              << source;
          for (int k = 0; k < d; ++k)
            out << ',' << format_double(x(i, k));
          out << '\n';
        }
      }
  };
  emit(reference, "reference");
  emit(reconstructed, "reconstructed");
  if (!out)
    throw IoError("failed writing " + path.string());
}

} // namespace kslearn
