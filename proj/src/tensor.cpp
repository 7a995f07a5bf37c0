#include "aspadmm/tensor.hpp"

#include "aspadmm/error.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

namespace aspadmm {

using cd = std::complex<double>;

Tensor3::Tensor3(Eigen::Index n1, Eigen::Index n2, Eigen::Index n3)
    : n1_(n1), n2_(n2), n3_(n3), data_(Vec::Zero(n1 * n2 * n3)) {
  if (n1 <= 0 || n2 <= 0 || n3 <= 0) throw Error("tensor dimensions must be positive");
}

Tensor3::Tensor3(Eigen::Index n1, Eigen::Index n2, Eigen::Index n3, Vec data)
    : n1_(n1), n2_(n2), n3_(n3), data_(std::move(data)) {
  if (n1 <= 0 || n2 <= 0 || n3 <= 0) throw Error("tensor dimensions must be positive");
  if (data_.size() != n1 * n2 * n3) {
    throw DimensionError("tensor data", static_cast<std::size_t>(n1 * n2 * n3),
                         static_cast<std::size_t>(data_.size()));
  }
}

namespace {

// exp(sign·2πi·m/n) with the exponent reduced mod n before evaluation.
cd twiddle(Eigen::Index m, Eigen::Index n, double sign) {
  const double ang = sign * 2.0 * std::numbers::pi * static_cast<double>(m % n) / static_cast<double>(n);
  return {std::cos(ang), std::sin(ang)};
}

Eigen::Index half(Eigen::Index n3) { return n3 / 2; }

}  // namespace

FourierSlices dft_mode3(const FourierSlices& slices, DftDirection direction) {
  const auto n3 = static_cast<Eigen::Index>(slices.size());
  if (n3 == 0) return {};
  const double sign = direction == DftDirection::forward ? -1.0 : 1.0;
  FourierSlices out(static_cast<std::size_t>(n3),
                    CMat::Zero(slices[0].rows(), slices[0].cols()));
  for (Eigen::Index j = 0; j < n3; ++j) {
    for (Eigen::Index t = 0; t < n3; ++t) out[j] += twiddle(j * t, n3, sign) * slices[t];
    if (direction == DftDirection::inverse) out[j] /= static_cast<double>(n3);
  }
  return out;
}

FourierSlices dft_mode3(const Tensor3& g) {
  const Eigen::Index n3 = g.n3();
  FourierSlices out(static_cast<std::size_t>(n3));
  for (Eigen::Index j = 0; j <= half(n3); ++j) {
    CMat acc = CMat::Zero(g.n1(), g.n2());
    for (Eigen::Index t = 0; t < n3; ++t) acc += twiddle(j * t, n3, -1.0) * g.slice(t).cast<cd>();
    out[j] = std::move(acc);
  }
  for (Eigen::Index j = half(n3) + 1; j < n3; ++j) out[j] = out[n3 - j].conjugate();
  return out;
}

Tensor3 idft_mode3_real(const FourierSlices& slices, double imag_tol) {
  const auto n3 = static_cast<Eigen::Index>(slices.size());
  if (n3 == 0) throw Error("idft of an empty slice list");
  const FourierSlices back = dft_mode3(slices, DftDirection::inverse);
  Tensor3 out(back[0].rows(), back[0].cols(), n3);
  double max_re = 0.0, max_im = 0.0;
  for (Eigen::Index t = 0; t < n3; ++t) {
    out.slice(t) = back[t].real();
    max_re = std::max(max_re, back[t].real().cwiseAbs().maxCoeff());
    max_im = std::max(max_im, back[t].imag().cwiseAbs().maxCoeff());
  }
  if (max_im > imag_tol * (1.0 + max_re)) {
    throw Error("inverse DFT left an imaginary residue of " + std::to_string(max_im));
  }
  return out;
}

namespace {

SliceSvd svd_of(const CMat& m) {
  Eigen::JacobiSVD<CMat> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return {svd.matrixU(), svd.singularValues(), svd.matrixV()};
}

// Applies `fn` to the singular values of slices 0..⌊n3/2⌋ and mirrors the rest.
template <typename Fn>
Tensor3 spectral_map(const Tensor3& g, Fn fn, bool* repeated = nullptr) {
  const Eigen::Index n3 = g.n3();
  FourierSlices f = dft_mode3(g);
  for (Eigen::Index j = 0; j <= half(n3); ++j) {
    SliceSvd s = svd_of(f[j]);
    if (repeated) {
      for (Eigen::Index i = 1; i < s.sigma.size(); ++i) {
        if (std::abs(s.sigma(i - 1) - s.sigma(i)) <= 1e-10) *repeated = true;
      }
    }
    const Vec mapped = s.sigma.unaryExpr(fn);
    f[j] = s.u * mapped.cast<cd>().asDiagonal() * s.v.adjoint();
  }
  for (Eigen::Index j = half(n3) + 1; j < n3; ++j) f[j] = f[n3 - j].conjugate();
  return idft_mode3_real(f);
}

}  // namespace

std::vector<SliceSvd> tsvd_slices(const Tensor3& g) {
  const Eigen::Index n3 = g.n3();
  const FourierSlices f = dft_mode3(g);
  std::vector<SliceSvd> out(static_cast<std::size_t>(n3));
  for (Eigen::Index j = 0; j <= half(n3); ++j) {
    out[j] = svd_of(f[j]);
    if (!out[j].sigma.allFinite()) throw Error("SVD failed on Fourier slice " + std::to_string(j));
  }
  for (Eigen::Index j = half(n3) + 1; j < n3; ++j) {
    const SliceSvd& m = out[n3 - j];
    out[j] = {m.u.conjugate(), m.sigma, m.v.conjugate()};
  }
  return out;
}

double tnn(const Tensor3& g) {
  double s = 0.0;
  for (const auto& sl : tsvd_slices(g)) s += sl.sigma.sum();
  return s / static_cast<double>(g.n3());
}

double tensor_spectral_norm(const Tensor3& g) {
  double m = 0.0;
  for (const auto& sl : tsvd_slices(g)) {
    if (sl.sigma.size()) m = std::max(m, sl.sigma.maxCoeff());
  }
  return m;
}

Tensor3 prox_tnn_capped(const Tensor3& y, double t, double cap) {
  if (!(t >= 0.0) || !(cap > 0.0)) throw Error("prox_tnn_capped needs t >= 0 and cap > 0");
  return spectral_map(y, [t, cap](double s) { return std::min(std::max(s - t, 0.0), cap); });
}

double h_spectral(const Tensor3& g, const DcPenalty& p) {
  double s = 0.0;
  for (const auto& sl : tsvd_slices(g)) {
    for (Eigen::Index i = 0; i < sl.sigma.size(); ++i) s += dc_h_eval(p, sl.sigma(i));
  }
  return s / static_cast<double>(g.n3());
}

SpectralGradient grad_h_spectral(const Tensor3& g, const DcPenalty& p) {
  SpectralGradient out;
  out.grad = spectral_map(g, [&p](double s) { return dc_h_grad(p, s); }, &out.repeated_sigma);
  return out;
}

namespace {

constexpr std::array<char, 4> kMagic = {'T', '3', 'F', '1'};

void put_u32(std::ostream& out, std::uint32_t v) {
  const std::array<unsigned char, 4> b = {static_cast<unsigned char>(v & 0xff),
                                          static_cast<unsigned char>((v >> 8) & 0xff),
                                          static_cast<unsigned char>((v >> 16) & 0xff),
                                          static_cast<unsigned char>((v >> 24) & 0xff)};
  out.write(reinterpret_cast<const char*>(b.data()), 4);
}

std::uint32_t get_u32(std::istream& in) {
  std::array<unsigned char, 4> b{};
  if (!in.read(reinterpret_cast<char*>(b.data()), 4)) throw Error("tensor binary: truncated header");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void put_f64(std::ostream& out, double v) {
  std::uint64_t bits = 0;
  std::memcpy(&bits, &v, sizeof bits);
  std::array<unsigned char, 8> b{};
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xff);
  out.write(reinterpret_cast<const char*>(b.data()), 8);
}

double get_f64(std::istream& in) {
  std::array<unsigned char, 8> b{};
  if (!in.read(reinterpret_cast<char*>(b.data()), 8)) throw Error("tensor binary: truncated data");
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  double v = 0.0;
  std::memcpy(&v, &bits, sizeof v);
  return v;
}

}  // namespace

void write_tensor_binary(std::ostream& out, const Tensor3& t) {
  out.write(kMagic.data(), 4);
  put_u32(out, static_cast<std::uint32_t>(t.n1()));
  put_u32(out, static_cast<std::uint32_t>(t.n2()));
  put_u32(out, static_cast<std::uint32_t>(t.n3()));
  for (Eigen::Index i = 0; i < t.size(); ++i) put_f64(out, t.vec()(i));
}

Tensor3 read_tensor_binary(std::istream& in) {
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), 4) || magic != kMagic) throw Error("tensor binary: bad magic");
  const Eigen::Index n1 = get_u32(in), n2 = get_u32(in), n3 = get_u32(in);
  Vec data(n1 * n2 * n3);
  for (Eigen::Index i = 0; i < data.size(); ++i) data(i) = get_f64(in);
  return {n1, n2, n3, std::move(data)};
}

void write_tensor_text(std::ostream& out, const Tensor3& t) {
  out << t.n1() << ' ' << t.n2() << ' ' << t.n3() << '\n';
  for (Eigen::Index k = 0; k < t.n3(); ++k) {
    for (Eigen::Index i = 0; i < t.n1(); ++i) {
      for (Eigen::Index j = 0; j < t.n2(); ++j) {
        if (j) out << ' ';
        out << format_double(t(i, j, k));
      }
      out << '\n';
    }
  }
}

Tensor3 read_tensor_text(std::istream& in) {
  long n1 = 0, n2 = 0, n3 = 0;
  if (!(in >> n1 >> n2 >> n3)) throw Error("tensor text: bad header");
  Tensor3 t(n1, n2, n3);
  for (Eigen::Index k = 0; k < n3; ++k) {
    // Each frontal slice is a row-major block, as in the matrix text format.
    std::ostringstream hdr;
    hdr << n1 << ' ' << n2 << '\n';
    std::string body;
    for (Eigen::Index e = 0; e < n1 * n2; ++e) {
      std::string tok;
      if (!(in >> tok)) throw Error("tensor text: truncated in slice " + std::to_string(k));
      body += tok + ' ';
    }
    std::istringstream blk(hdr.str() + body);
    t.slice(k) = read_matrix_text(blk);
  }
  return t;
}

void write_tensor_file(const std::string& path, const Tensor3& t) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write tensor file " + path);
  write_tensor_binary(out, t);
}

Tensor3 read_tensor_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open tensor file " + path);
  std::array<char, 4> magic{};
  in.read(magic.data(), 4);
  in.clear();
  in.seekg(0);
  if (magic == kMagic) return read_tensor_binary(in);
  return read_tensor_text(in);
}

}  // namespace aspadmm
