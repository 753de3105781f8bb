#include "patchup/layers.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace patchup {

using MatMap = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                        Eigen::RowMajor>>;
using ConstMatMap = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic,
                                                   Eigen::Dynamic, Eigen::RowMajor>>;

static Tensor he_init(std::vector<std::size_t> shape, std::size_t fan_in,
                      const std::string&, Rng& rng) {
  Tensor t(std::move(shape));
  std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / static_cast<double>(fan_in)));
  for (std::size_t i = 0; i < t.numel(); ++i) t[i] = dist(rng);
  return t;
}

static ParamTensor make_param(const std::string& name, Tensor value) {
  ParamTensor p;
  p.name = name;
  p.grad = Tensor(value.shape());
  p.momentum = Tensor(value.shape());
  p.value = std::move(value);
  return p;
}

// ---------------------------------------------------------------------------
// Conv2d

Conv2d::Conv2d(std::size_t in_channels, std::size_t out_channels, std::size_t kernel,
               const std::string& name, Rng& rng)
    : in_c_(in_channels), out_c_(out_channels), k_(kernel) {
  if (kernel % 2 == 0) throw std::invalid_argument("Conv2d: kernel must be odd");
  const std::size_t fan_in = in_c_ * k_ * k_;
  weight_ = make_param(name + ".weight", he_init({out_c_, fan_in}, fan_in, name, rng));
  bias_ = make_param(name + ".bias", Tensor({out_c_}));
}

// cols layout: (in_c*k*k) rows x (B*H*W) columns, column-major over output
// positions so GEMM maps directly onto the output.
static void im2col(const Tensor& x, std::size_t k, std::vector<double>& cols) {
  const std::size_t B = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  const std::size_t pad = (k - 1) / 2;
  const std::size_t rows = C * k * k, n = B * H * W;
  cols.assign(rows * n, 0.0);
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t c = 0; c < C; ++c)
      for (std::size_t ky = 0; ky < k; ++ky)
        for (std::size_t kx = 0; kx < k; ++kx) {
          const std::size_t row = (c * k + ky) * k + kx;
          double* dst = cols.data() + row * n + b * H * W;
          for (std::size_t y = 0; y < H; ++y) {
            const long sy = static_cast<long>(y + ky) - static_cast<long>(pad);
            if (sy < 0 || sy >= static_cast<long>(H)) continue;
            for (std::size_t xw = 0; xw < W; ++xw) {
              const long sx = static_cast<long>(xw + kx) - static_cast<long>(pad);
              if (sx < 0 || sx >= static_cast<long>(W)) continue;
              dst[y * W + xw] = x.at(b, c, static_cast<std::size_t>(sy),
                                     static_cast<std::size_t>(sx));
            }
          }
        }
}

static void col2im(const std::vector<double>& dcols, std::size_t k,
                   const std::vector<std::size_t>& shape, Tensor& dx) {
  const std::size_t B = shape[0], C = shape[1], H = shape[2], W = shape[3];
  const std::size_t pad = (k - 1) / 2;
  const std::size_t n = B * H * W;
  dx = Tensor(shape);
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t c = 0; c < C; ++c)
      for (std::size_t ky = 0; ky < k; ++ky)
        for (std::size_t kx = 0; kx < k; ++kx) {
          const std::size_t row = (c * k + ky) * k + kx;
          const double* src = dcols.data() + row * n + b * H * W;
          for (std::size_t y = 0; y < H; ++y) {
            const long sy = static_cast<long>(y + ky) - static_cast<long>(pad);
            if (sy < 0 || sy >= static_cast<long>(H)) continue;
            for (std::size_t xw = 0; xw < W; ++xw) {
              const long sx = static_cast<long>(xw + kx) - static_cast<long>(pad);
              if (sx < 0 || sx >= static_cast<long>(W)) continue;
              dx.at(b, c, static_cast<std::size_t>(sy), static_cast<std::size_t>(sx)) +=
                  src[y * W + xw];
            }
          }
        }
}

Tensor Conv2d::forward(const Tensor& x, bool) {
  if (x.rank() != 4 || x.dim(1) != in_c_)
    throw std::invalid_argument("Conv2d: bad input shape " + x.shape_str());
  in_shape_ = x.shape();
  const std::size_t B = x.dim(0), H = x.dim(2), W = x.dim(3);
  im2col(x, k_, cols_);
  const std::size_t rows = in_c_ * k_ * k_, n = B * H * W;
  Tensor out({B, out_c_, H, W});
  ConstMatMap wm(weight_.value.data(), static_cast<long>(out_c_), static_cast<long>(rows));
  ConstMatMap cm(cols_.data(), static_cast<long>(rows), static_cast<long>(n));
  MatMap om(out.data(), static_cast<long>(out_c_), static_cast<long>(n));
  // output rows are channels; reorder to (B,C,H,W) afterwards
  Eigen::MatrixXd y = wm * cm;
  for (std::size_t oc = 0; oc < out_c_; ++oc)
    for (std::size_t b = 0; b < B; ++b)
      for (std::size_t p = 0; p < H * W; ++p)
        out.data()[((b * out_c_ + oc) * H * W) + p] =
            y(static_cast<long>(oc), static_cast<long>(b * H * W + p)) +
            bias_.value[oc];
  (void)om;
  return out;
}

Tensor Conv2d::backward(const Tensor& dout) {
  const std::size_t B = in_shape_[0], H = in_shape_[2], W = in_shape_[3];
  const std::size_t rows = in_c_ * k_ * k_, n = B * H * W;
  // reorder dout to (out_c, B*H*W)
  Eigen::MatrixXd dy(static_cast<long>(out_c_), static_cast<long>(n));
  for (std::size_t oc = 0; oc < out_c_; ++oc)
    for (std::size_t b = 0; b < B; ++b)
      for (std::size_t p = 0; p < H * W; ++p)
        dy(static_cast<long>(oc), static_cast<long>(b * H * W + p)) =
            dout.data()[((b * out_c_ + oc) * H * W) + p];
  ConstMatMap cm(cols_.data(), static_cast<long>(rows), static_cast<long>(n));
  MatMap dwm(weight_.grad.data(), static_cast<long>(out_c_), static_cast<long>(rows));
  dwm.noalias() += dy * cm.transpose();
  for (std::size_t oc = 0; oc < out_c_; ++oc)
    bias_.grad[oc] += dy.row(static_cast<long>(oc)).sum();
  ConstMatMap wm(weight_.value.data(), static_cast<long>(out_c_), static_cast<long>(rows));
  Eigen::MatrixXd dcols_m = wm.transpose() * dy;
  std::vector<double> dcols(rows * n);
  Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      dcols.data(), static_cast<long>(rows), static_cast<long>(n)) = dcols_m;
  Tensor dx;
  col2im(dcols, k_, in_shape_, dx);
  return dx;
}

// ---------------------------------------------------------------------------
// BatchNorm2d

BatchNorm2d::BatchNorm2d(std::size_t channels, const std::string& name, double momentum,
                         double eps)
    : name_(name), channels_(channels), momentum_(momentum), eps_(eps) {
  Tensor ones({channels});
  for (std::size_t c = 0; c < channels; ++c) ones[c] = 1.0;
  gamma_ = make_param(name + ".gamma", ones);
  beta_ = make_param(name + ".beta", Tensor({channels}));
  running_mean_ = Tensor({channels});
  running_var_ = ones;
}

Tensor BatchNorm2d::forward(const Tensor& x, bool train) {
  if (x.rank() != 4 || x.dim(1) != channels_)
    throw std::invalid_argument("BatchNorm2d: bad input shape " + x.shape_str());
  in_shape_ = x.shape();
  const std::size_t B = x.dim(0), H = x.dim(2), W = x.dim(3);
  const double n = static_cast<double>(B * H * W);
  inv_std_.assign(channels_, 0.0);
  std::vector<double> mean(channels_, 0.0);
  if (train) {
    std::vector<double> var(channels_, 0.0);
    for (std::size_t c = 0; c < channels_; ++c) {
      double m = 0.0;
      for (std::size_t b = 0; b < B; ++b)
        for (std::size_t y = 0; y < H; ++y)
          for (std::size_t w = 0; w < W; ++w) m += x.at(b, c, y, w);
      m /= n;
      double v = 0.0;
      for (std::size_t b = 0; b < B; ++b)
        for (std::size_t y = 0; y < H; ++y)
          for (std::size_t w = 0; w < W; ++w) {
            const double d = x.at(b, c, y, w) - m;
            v += d * d;
          }
      v /= n;
      mean[c] = m;
      var[c] = v;
      running_mean_[c] = (1.0 - momentum_) * running_mean_[c] + momentum_ * m;
      running_var_[c] = (1.0 - momentum_) * running_var_[c] + momentum_ * v;
      inv_std_[c] = 1.0 / std::sqrt(v + eps_);
    }
  } else {
    for (std::size_t c = 0; c < channels_; ++c) {
      mean[c] = running_mean_[c];
      inv_std_[c] = 1.0 / std::sqrt(running_var_[c] + eps_);
    }
  }
  xhat_ = Tensor(x.shape());
  Tensor out(x.shape());
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t c = 0; c < channels_; ++c)
      for (std::size_t y = 0; y < H; ++y)
        for (std::size_t w = 0; w < W; ++w) {
          const double xh = (x.at(b, c, y, w) - mean[c]) * inv_std_[c];
          xhat_.at(b, c, y, w) = xh;
          out.at(b, c, y, w) = gamma_.value[c] * xh + beta_.value[c];
        }
  return out;
}

Tensor BatchNorm2d::backward(const Tensor& dout) {
  const std::size_t B = in_shape_[0], H = in_shape_[2], W = in_shape_[3];
  const double n = static_cast<double>(B * H * W);
  Tensor dx(in_shape_);
  for (std::size_t c = 0; c < channels_; ++c) {
    double dg = 0.0, db = 0.0;
    for (std::size_t b = 0; b < B; ++b)
      for (std::size_t y = 0; y < H; ++y)
        for (std::size_t w = 0; w < W; ++w) {
          dg += dout.at(b, c, y, w) * xhat_.at(b, c, y, w);
          db += dout.at(b, c, y, w);
        }
    gamma_.grad[c] += dg;
    beta_.grad[c] += db;
    const double g = gamma_.value[c] * inv_std_[c];
    for (std::size_t b = 0; b < B; ++b)
      for (std::size_t y = 0; y < H; ++y)
        for (std::size_t w = 0; w < W; ++w)
          dx.at(b, c, y, w) =
              g * (dout.at(b, c, y, w) - db / n - xhat_.at(b, c, y, w) * dg / n);
  }
  return dx;
}

// ---------------------------------------------------------------------------
// ReLU / MaxPool2d / Flatten / Linear

Tensor ReLU::forward(const Tensor& x, bool) {
  positive_.resize(x.numel());
  Tensor out(x.shape());
  for (std::size_t i = 0; i < x.numel(); ++i) {
    positive_[i] = x[i] > 0.0;
    out[i] = positive_[i] ? x[i] : 0.0;
  }
  return out;
}

Tensor ReLU::backward(const Tensor& dout) {
  Tensor dx(dout.shape());
  for (std::size_t i = 0; i < dout.numel(); ++i)
    dx[i] = positive_[i] ? dout[i] : 0.0;
  return dx;
}

Tensor MaxPool2d::forward(const Tensor& x, bool) {
  const std::size_t B = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  if (H % 2 || W % 2) throw std::invalid_argument("MaxPool2d: odd spatial size");
  in_shape_ = x.shape();
  Tensor out({B, C, H / 2, W / 2});
  argmax_.resize(out.numel());
  std::size_t idx = 0;
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t c = 0; c < C; ++c)
      for (std::size_t y = 0; y < H; y += 2)
        for (std::size_t w = 0; w < W; w += 2) {
          double best = x.at(b, c, y, w);
          std::size_t besti = ((b * C + c) * H + y) * W + w;
          for (std::size_t dy = 0; dy < 2; ++dy)
            for (std::size_t dw = 0; dw < 2; ++dw) {
              const double v = x.at(b, c, y + dy, w + dw);
              if (v > best) {
                best = v;
                besti = ((b * C + c) * H + y + dy) * W + w + dw;
              }
            }
          out[idx] = best;
          argmax_[idx++] = besti;
        }
  return out;
}

Tensor MaxPool2d::backward(const Tensor& dout) {
  Tensor dx(in_shape_);
  for (std::size_t i = 0; i < dout.numel(); ++i) dx[argmax_[i]] += dout[i];
  return dx;
}

Tensor Flatten::forward(const Tensor& x, bool) {
  in_shape_ = x.shape();
  return Tensor({x.dim(0), x.numel() / x.dim(0)},
                std::vector<double>(x.data(), x.data() + x.numel()));
}

Tensor Flatten::backward(const Tensor& dout) {
  return Tensor(in_shape_, std::vector<double>(dout.data(), dout.data() + dout.numel()));
}

Linear::Linear(std::size_t in_features, std::size_t out_features, const std::string& name,
               Rng& rng)
    : in_f_(in_features), out_f_(out_features) {
  weight_ = make_param(name + ".weight", he_init({out_f_, in_f_}, in_f_, name, rng));
  bias_ = make_param(name + ".bias", Tensor({out_f_}));
}

Tensor Linear::forward(const Tensor& x, bool) {
  if (x.rank() != 2 || x.dim(1) != in_f_)
    throw std::invalid_argument("Linear: bad input shape " + x.shape_str());
  input_ = x;
  const std::size_t B = x.dim(0);
  Tensor out({B, out_f_});
  ConstMatMap xm(x.data(), static_cast<long>(B), static_cast<long>(in_f_));
  ConstMatMap wm(weight_.value.data(), static_cast<long>(out_f_), static_cast<long>(in_f_));
  MatMap om(out.data(), static_cast<long>(B), static_cast<long>(out_f_));
  om.noalias() = xm * wm.transpose();
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t o = 0; o < out_f_; ++o) out.at(b, o) += bias_.value[o];
  return out;
}

Tensor Linear::backward(const Tensor& dout) {
  const std::size_t B = input_.dim(0);
  ConstMatMap dm(dout.data(), static_cast<long>(B), static_cast<long>(out_f_));
  ConstMatMap xm(input_.data(), static_cast<long>(B), static_cast<long>(in_f_));
  MatMap dwm(weight_.grad.data(), static_cast<long>(out_f_), static_cast<long>(in_f_));
  dwm.noalias() += dm.transpose() * xm;
  for (std::size_t o = 0; o < out_f_; ++o)
    bias_.grad[o] += dm.col(static_cast<long>(o)).sum();
  Tensor dx({B, in_f_});
  ConstMatMap wm(weight_.value.data(), static_cast<long>(out_f_), static_cast<long>(in_f_));
  MatMap dxm(dx.data(), static_cast<long>(B), static_cast<long>(in_f_));
  dxm.noalias() = dm * wm;
  return dx;
}

}  // namespace patchup
