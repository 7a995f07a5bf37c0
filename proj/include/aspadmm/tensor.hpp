#pragma once

#include "aspadmm/dc.hpp"
#include "aspadmm/linop.hpp"

#include <complex>
#include <iosfwd>
#include <string>
#include <vector>

namespace aspadmm {

using CMat = Eigen::MatrixXcd;

// Real n1×n2×n3 tensor. Storage is slice-major: frontal slice k occupies a
// contiguous column-major n1×n2 block, so entry (i,j,k) sits at i + n1·(j + n2·k).
class Tensor3 {
 public:
  Tensor3() = default;
  Tensor3(Eigen::Index n1, Eigen::Index n2, Eigen::Index n3);
  Tensor3(Eigen::Index n1, Eigen::Index n2, Eigen::Index n3, Vec data);

  static Tensor3 zeros(Eigen::Index n1, Eigen::Index n2, Eigen::Index n3) {
    return Tensor3(n1, n2, n3);
  }

  Eigen::Index n1() const { return n1_; }
  Eigen::Index n2() const { return n2_; }
  Eigen::Index n3() const { return n3_; }
  Eigen::Index size() const { return data_.size(); }
  bool same_shape(const Tensor3& o) const { return n1_ == o.n1_ && n2_ == o.n2_ && n3_ == o.n3_; }

  double& operator()(Eigen::Index i, Eigen::Index j, Eigen::Index k) {
    return data_(i + n1_ * (j + n2_ * k));
  }
  double operator()(Eigen::Index i, Eigen::Index j, Eigen::Index k) const {
    return data_(i + n1_ * (j + n2_ * k));
  }

  Eigen::Map<Mat> slice(Eigen::Index k) { return {data_.data() + n1_ * n2_ * k, n1_, n2_}; }
  Eigen::Map<const Mat> slice(Eigen::Index k) const {
    return {data_.data() + n1_ * n2_ * k, n1_, n2_};
  }

  const Vec& vec() const { return data_; }
  Vec& vec() { return data_; }
  double frobenius() const { return data_.norm(); }

 private:
  Eigen::Index n1_ = 0, n2_ = 0, n3_ = 0;
  Vec data_;
};

using FourierSlices = std::vector<CMat>;

enum class DftDirection { forward, inverse };

// Direct summation along mode 3. Forward is unnormalized; inverse carries 1/n3.
FourierSlices dft_mode3(const FourierSlices& slices, DftDirection direction);
// Real input: slices 0..⌊n3/2⌋ are summed, the rest mirrored as conjugates.
FourierSlices dft_mode3(const Tensor3& g);
// Inverse to a real tensor; throws when the imaginary residue exceeds imag_tol·(1+max|entry|).
Tensor3 idft_mode3_real(const FourierSlices& slices, double imag_tol = 1e-9);

struct SliceSvd {
  CMat u;
  Vec sigma;  // descending
  CMat v;
};

std::vector<SliceSvd> tsvd_slices(const Tensor3& g);

// (1/n3)·Σ_i ‖Ĝⁱ‖_*
double tnn(const Tensor3& g);
// max_i ‖Ĝⁱ‖₂
double tensor_spectral_norm(const Tensor3& g);

// Exact prox of t·‖·‖_TNN + δ{‖·‖ ≤ cap}: per Fourier singular value σ ↦ min(max(σ - t, 0), cap).
Tensor3 prox_tnn_capped(const Tensor3& y, double t, double cap);

// H(G) = (1/n3)·Σ_i Σ_j h(σ_j(Ĝⁱ))
double h_spectral(const Tensor3& g, const DcPenalty& p);

struct SpectralGradient {
  Tensor3 grad;
  // Some Fourier slice had singular values within 1e-10 of each other.
  bool repeated_sigma = false;
};

SpectralGradient grad_h_spectral(const Tensor3& g, const DcPenalty& p);

void write_tensor_binary(std::ostream& out, const Tensor3& t);
Tensor3 read_tensor_binary(std::istream& in);
void write_tensor_text(std::ostream& out, const Tensor3& t);
Tensor3 read_tensor_text(std::istream& in);
void write_tensor_file(const std::string& path, const Tensor3& t);
// Binary when the file starts with the magic, text otherwise.
Tensor3 read_tensor_file(const std::string& path);

}  // namespace aspadmm
