#include "hsi/simgen.hpp"

#include "hsi/keyval.hpp"
#include "hsi/matrix_io.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace hsi {

void SceneSpec::validate() const {
  if (materials < 1) {
    throw ConfigError("materials must be positive");
  }
  if (variants_per_material < 1) {
    throw ConfigError("variants per material must be positive");
  }
  if (width < 1 || height < 1) {
    throw ConfigError("scene dimensions must be positive");
  }
  if (bands < 2) {
    throw ConfigError("band count must be at least 2");
  }
  if (!(1 <= min_active && min_active <= max_active && max_active <= materials)) {
    throw ConfigError("active-material range must satisfy 1 <= min <= max <= materials");
  }
  if (!(psi_min > 0.0) || psi_min > psi_max) {
    throw ConfigError("scaling range must satisfy 0 < psi_min <= psi_max");
  }
  if (beta_min > beta_max) {
    throw ConfigError("quadratic coefficient range is inverted");
  }
  if (!(variant_noise >= 0.0)) {
    throw ConfigError("variant noise must be nonnegative");
  }
  if (std::isnan(snr_db)) {
    throw ConfigError("snr_db must be a number or inf");
  }
}

Matrix generate_base_signatures(int materials, int bands, std::mt19937_64& rng) {
  if (materials < 1 || bands < 2) {
    throw ConfigError("need at least 1 material and 2 bands");
  }
  const double l = static_cast<double>(bands);
  std::uniform_int_distribution<int> bump_count(3, 6);
  std::uniform_real_distribution<double> center(0.0, l - 1.0);
  std::uniform_real_distribution<double> width(l / 8.0, l / 4.0);
  std::uniform_real_distribution<double> amplitude(0.4, 1.0);
  std::uniform_real_distribution<double> offset(0.1, 0.4);

  Matrix out(bands, materials);
  for (int p = 0; p < materials; ++p) {
    Vector s = Vector::Constant(bands, offset(rng));
    const int bumps = bump_count(rng);
    for (int b = 0; b < bumps; ++b) {
      const double c = center(rng);
      const double w = width(rng);
      const double a = amplitude(rng);
      for (int band = 0; band < bands; ++band) {
        const double d = (band - c) / w;
        s(band) += a * std::exp(-0.5 * d * d);
      }
    }
    out.col(p) = s / s.maxCoeff();
  }
  return out;
}

Matrix generate_variants(const Vector& base, int count, const SceneSpec& spec,
                         std::mt19937_64& rng) {
  spec.validate();
  if (count < 1) {
    throw ConfigError("variant count must be positive");
  }
  std::uniform_real_distribution<double> psi(spec.psi_min, spec.psi_max);
  std::uniform_real_distribution<double> beta(spec.beta_min, spec.beta_max);
  std::normal_distribution<double> noise(0.0, spec.variant_noise);

  Matrix out(base.size(), count);
  for (int j = 0; j < count; ++j) {
    const double ps = psi(rng);
    const double be = beta(rng);
    for (Eigen::Index band = 0; band < base.size(); ++band) {
      double v = ps * base(band) + be * base(band) * base(band);
      if (spec.variant_noise > 0.0) {
        v += noise(rng);
      }
      out(band, j) = std::max(v, 0.0);
    }
  }
  return out;
}

namespace {

/// Circular convolution of each field row/column with a normalized Gaussian
/// kernel, applied separably.
void smooth_field(Matrix& field, double sigma) {
  const int h = static_cast<int>(field.rows());
  const int w = static_cast<int>(field.cols());
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double v = std::exp(-0.5 * (i / sigma) * (i / sigma));
    kernel[static_cast<std::size_t>(i + radius)] = v;
    sum += v;
  }
  for (double& v : kernel) {
    v /= sum;
  }

  Matrix tmp(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        const int xi = ((x + i) % w + w) % w;
        acc += kernel[static_cast<std::size_t>(i + radius)] * field(y, xi);
      }
      tmp(y, x) = acc;
    }
  }
  for (int x = 0; x < w; ++x) {
    for (int y = 0; y < h; ++y) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        const int yi = ((y + i) % h + h) % h;
        acc += kernel[static_cast<std::size_t>(i + radius)] * tmp(yi, x);
      }
      field(y, x) = acc;
    }
  }
}

}  // namespace

Matrix generate_abundance_field(const SceneSpec& spec, std::mt19937_64& rng) {
  spec.validate();
  const int P = spec.materials;
  const int N = spec.pixels();
  const double sigma = std::min(spec.width, spec.height) / 10.0;

  std::normal_distribution<double> white(0.0, 1.0);
  std::vector<Matrix> fields;
  fields.reserve(static_cast<std::size_t>(P));
  for (int p = 0; p < P; ++p) {
    Matrix f(spec.height, spec.width);
    for (int y = 0; y < spec.height; ++y) {
      for (int x = 0; x < spec.width; ++x) {
        f(y, x) = white(rng);
      }
    }
    if (sigma > 0.0) {
      smooth_field(f, sigma);
    }
    fields.push_back(std::move(f));
  }

  std::uniform_int_distribution<int> active_count(spec.min_active, spec.max_active);
  Matrix out = Matrix::Zero(P, N);
  std::vector<int> order(static_cast<std::size_t>(P));
  for (int k = 0; k < N; ++k) {
    const int y = k / spec.width;
    const int x = k % spec.width;
    const int keep = active_count(rng);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return fields[static_cast<std::size_t>(a)](y, x) >
             fields[static_cast<std::size_t>(b)](y, x);
    });
    double sum = 0.0;
    for (int i = 0; i < keep; ++i) {
      const double v = std::max(fields[static_cast<std::size_t>(order[i])](y, x), 0.0);
      out(order[static_cast<std::size_t>(i)], k) = v;
      sum += v;
    }
    if (sum > 0.0) {
      for (int i = 0; i < keep; ++i) {
        out(order[static_cast<std::size_t>(i)], k) /= sum;
      }
    } else {
      for (int i = 0; i < keep; ++i) {
        out(order[static_cast<std::size_t>(i)], k) = 1.0 / keep;
      }
    }
  }
  return out;
}

std::pair<SpectralImage, GroundTruth> generate_scene(const SceneSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  const int P = spec.materials;
  const int mv = spec.variants_per_material;
  const int Q = spec.atoms();
  const int N = spec.pixels();

  const Matrix bases = generate_base_signatures(P, spec.bands, rng);

  Matrix dict(spec.bands, Q);
  std::vector<int> assignment(static_cast<std::size_t>(Q));
  for (int p = 0; p < P; ++p) {
    dict.middleCols(static_cast<Eigen::Index>(p) * mv, mv) =
        generate_variants(bases.col(p), mv, spec, rng);
    for (int j = 0; j < mv; ++j) {
      assignment[static_cast<std::size_t>(p * mv + j)] = p;
    }
  }

  const Matrix collapsed = generate_abundance_field(spec, rng);

  Matrix per_atom = Matrix::Zero(Q, N);
  Eigen::MatrixXi chosen = Eigen::MatrixXi::Constant(P, N, -1);
  std::uniform_int_distribution<int> variant_pick(0, mv - 1);
  for (int k = 0; k < N; ++k) {
    for (int p = 0; p < P; ++p) {
      const double a = collapsed(p, k);
      if (a <= 0.0) {
        continue;
      }
      const int atom = p * mv + variant_pick(rng);
      per_atom(atom, k) = a;
      chosen(p, k) = atom;
    }
  }

  Matrix x = dict * per_atom;
  if (!std::isinf(spec.snr_db)) {
    const double signal_power = x.squaredNorm() / static_cast<double>(x.size());
    const double sigma = std::sqrt(signal_power * std::pow(10.0, -spec.snr_db / 10.0));
    std::normal_distribution<double> noise(0.0, sigma);
    for (Eigen::Index k = 0; k < x.cols(); ++k) {
      for (Eigen::Index band = 0; band < x.rows(); ++band) {
        x(band, k) += noise(rng);
      }
    }
  }

  GroundTruth truth{bases,
                    EndmemberDictionary(dict),
                    GroupStructure(P, std::move(assignment)),
                    std::move(per_atom),
                    collapsed,
                    std::move(chosen)};
  SpectralImage image(std::move(x), Layout{spec.width, spec.height});
  return {std::move(image), std::move(truth)};
}

PerPixelEndmembers GroundTruth::per_pixel_endmembers() const {
  const int P = groups.group_count();
  const int N = static_cast<int>(per_atom.cols());
  PerPixelEndmembers out;
  out.bands = static_cast<int>(dictionary.bands());
  out.group_count = P;
  out.pixels = N;
  out.signatures = Matrix::Zero(out.bands, static_cast<Eigen::Index>(P) * N);
  out.defined.setConstant(P, N, false);
  for (int k = 0; k < N; ++k) {
    for (int p = 0; p < P; ++p) {
      const int atom = chosen_atom(p, k);
      if (atom < 0) {
        continue;
      }
      out.signatures.col(out.column(p, k)) = dictionary.signatures().col(atom);
      out.defined(p, k) = true;
    }
  }
  return out;
}

void save_scene(const std::string& directory, const SpectralImage& image,
                const GroundTruth& truth, const SceneSpec& spec) {
  const std::string dir = directory.empty() ? "." : directory;
  write_matrix_bin(dir + "/scene.bin", image.data());
  write_matrix_bin(dir + "/dictionary.bin", truth.dictionary.signatures());
  write_groups(dir + "/groups.txt", truth.groups);
  write_matrix_bin(dir + "/truth_atom.bin", truth.per_atom);
  write_matrix_bin(dir + "/truth_group.bin", truth.collapsed);

  keyval::Pairs pairs;
  pairs.emplace_back("materials", std::to_string(spec.materials));
  pairs.emplace_back("variants", std::to_string(spec.variants_per_material));
  pairs.emplace_back("width", std::to_string(spec.width));
  pairs.emplace_back("height", std::to_string(spec.height));
  pairs.emplace_back("bands", std::to_string(spec.bands));
  pairs.emplace_back("k_min", std::to_string(spec.min_active));
  pairs.emplace_back("k_max", std::to_string(spec.max_active));
  pairs.emplace_back("psi_min", keyval::format_double(spec.psi_min));
  pairs.emplace_back("psi_max", keyval::format_double(spec.psi_max));
  pairs.emplace_back("beta_min", keyval::format_double(spec.beta_min));
  pairs.emplace_back("beta_max", keyval::format_double(spec.beta_max));
  pairs.emplace_back("sigma_v", keyval::format_double(spec.variant_noise));
  pairs.emplace_back("snr_db", keyval::format_double(spec.snr_db));
  pairs.emplace_back("seed", std::to_string(spec.seed));
  keyval::write_file(dir + "/spec.txt", pairs);
}

}  // namespace hsi
