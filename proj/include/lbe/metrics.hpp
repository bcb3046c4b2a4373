#pragma once

// Classical and LBE-inflated validation indices.
//
// All sums run in ascending sample order over an inclusive window. An index
// whose denominator degenerates is reported as absent, never as NaN.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "lbe/simulation.hpp"

namespace lbe {

/// Per-sample lower bound error delta_n = |a_n - b_n| / 2.
struct LbeSeries {
  std::vector<double> delta;
};

inline LbeSeries lbe(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw std::invalid_argument("lbe needs orbits of equal length (" + std::to_string(a.size()) + " vs " +
                                std::to_string(b.size()) + ")");
  LbeSeries out;
  out.delta.reserve(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out.delta.push_back(std::abs(a[i] - b[i]) / 2.0);
  return out;
}

inline LbeSeries lbe(const Orbit& a, const Orbit& b) { return lbe(a.samples, b.samples); }

/// Inclusive sample range [first, last].
struct Window {
  std::size_t first = 0;
  std::size_t last = 0;

  std::size_t size() const noexcept { return last - first + 1; }
};

struct IndexValue {
  std::optional<double> value;
  std::size_t skipped_samples = 0;
};

namespace detail {

inline void check_window(std::size_t y, std::size_t yhat, Window w, const std::size_t* delta = nullptr) {
  if (y != yhat) throw std::invalid_argument("reference and prediction lengths differ");
  if (delta && *delta != y) throw std::invalid_argument("LBE series length differs from the orbits");
  if (w.first > w.last || w.last >= y) throw std::invalid_argument("validation window out of range");
}

/// Prediction moved away from the reference by its LBE: yhat*(1-delta)
/// below the reference, yhat*(1+delta) otherwise. At yhat == y both branches
/// give the same |residual|.
inline double inflated(double y, double yhat, double delta) {
  return yhat < y ? yhat * (1.0 - delta) : yhat * (1.0 + delta);
}

template <class Prediction>
IndexValue rmse_of(std::span<const double> y, Window w, Prediction&& prediction) {
  double total = 0.0;
  for (std::size_t k = w.first; k <= w.last; ++k) total += y[k];
  const double mean = total / static_cast<double>(w.size());
  double residual = 0.0;
  double spread = 0.0;
  for (std::size_t k = w.first; k <= w.last; ++k) {
    const double e = y[k] - prediction(k);
    const double s = y[k] - mean;
    residual += e * e;
    spread += s * s;
  }
  if (spread == 0.0) return {};
  return {std::sqrt(residual / spread)};
}

template <class Prediction>
IndexValue mape_of(std::span<const double> y, Window w, Prediction&& prediction) {
  double total = 0.0;
  std::size_t included = 0;
  std::size_t skipped = 0;
  for (std::size_t k = w.first; k <= w.last; ++k) {
    if (y[k] == 0.0) {
      ++skipped;
      continue;
    }
    total += std::abs((prediction(k) - y[k]) / y[k]);
    ++included;
  }
  if (included == 0) return {std::nullopt, skipped};
  return {total / static_cast<double>(included), skipped};
}

}  // namespace detail

inline IndexValue rmse(std::span<const double> y, std::span<const double> yhat, Window w) {
  detail::check_window(y.size(), yhat.size(), w);
  return detail::rmse_of(y, w, [&](std::size_t k) { return yhat[k]; });
}

/// Samples with y(k) == 0 are skipped and counted.
inline IndexValue mape(std::span<const double> y, std::span<const double> yhat, Window w) {
  detail::check_window(y.size(), yhat.size(), w);
  return detail::mape_of(y, w, [&](std::size_t k) { return yhat[k]; });
}

inline IndexValue lrmse(std::span<const double> y, std::span<const double> yhat, const LbeSeries& lbe, Window w) {
  const std::size_t n = lbe.delta.size();
  detail::check_window(y.size(), yhat.size(), w, &n);
  return detail::rmse_of(y, w, [&](std::size_t k) { return detail::inflated(y[k], yhat[k], lbe.delta[k]); });
}

inline IndexValue lmape(std::span<const double> y, std::span<const double> yhat, const LbeSeries& lbe, Window w) {
  const std::size_t n = lbe.delta.size();
  detail::check_window(y.size(), yhat.size(), w, &n);
  return detail::mape_of(y, w, [&](std::size_t k) { return detail::inflated(y[k], yhat[k], lbe.delta[k]); });
}

/// |modified - classical| / max(|modified|, |classical|) * 100, so the result
/// lies in [0, 100] for same-signed inputs; 0 when both are zero.
inline double difference_metric(double classical, double modified) {
  const double scale = std::max(std::abs(classical), std::abs(modified));
  if (scale == 0.0) return 0.0;
  return std::abs(modified - classical) / scale * 100.0;
}

enum class IndexKind { rmse, mape, lrmse, lmape };

inline const char* to_string(IndexKind kind) {
  switch (kind) {
    case IndexKind::rmse: return "rmse";
    case IndexKind::mape: return "mape";
    case IndexKind::lrmse: return "lrmse";
    case IndexKind::lmape: return "lmape";
  }
  return "?";
}

/// values[n] is the index over [k_start, n]; absent before k_start and
/// wherever the index is undefined.
struct IndexSeries {
  IndexKind kind = IndexKind::rmse;
  std::size_t k_start = 0;
  std::vector<std::optional<double>> values;
  std::size_t skipped_samples = 0;  // for the widest window

  std::optional<double> at(std::size_t n) const { return n < values.size() ? values[n] : std::nullopt; }

  std::optional<std::size_t> first_defined() const {
    for (std::size_t n = 0; n < values.size(); ++n)
      if (values[n]) return n;
    return std::nullopt;
  }
};

/// `lbe` is required for the L-indices and ignored otherwise.
inline IndexSeries running_series(IndexKind kind, std::span<const double> y, std::span<const double> yhat,
                                  const LbeSeries* lbe, std::size_t k_start) {
  if ((kind == IndexKind::lrmse || kind == IndexKind::lmape) && lbe == nullptr)
    throw std::invalid_argument(std::string(to_string(kind)) + " needs an LBE series");
  IndexSeries series{kind, k_start, std::vector<std::optional<double>>(y.size()), 0};
  for (std::size_t n = k_start; n < y.size(); ++n) {
    const Window w{k_start, n};
    IndexValue v;
    switch (kind) {
      case IndexKind::rmse: v = rmse(y, yhat, w); break;
      case IndexKind::mape: v = mape(y, yhat, w); break;
      case IndexKind::lrmse: v = lrmse(y, yhat, *lbe, w); break;
      case IndexKind::lmape: v = lmape(y, yhat, *lbe, w); break;
    }
    series.values[n] = v.value;
    series.skipped_samples = v.skipped_samples;
  }
  return series;
}

struct Provenance {
  std::string reference;   // plays y
  std::string prediction;  // plays yhat
  std::string lbe_pair;    // the two pseudo-orbits behind delta
};

struct ValidationReport {
  Provenance provenance;
  std::size_t k_start = 0;
  std::vector<double> y;
  std::vector<double> yhat;
  LbeSeries lbe;
  IndexSeries rmse;
  IndexSeries lrmse;
  IndexSeries mape;
  IndexSeries lmape;
  std::vector<std::optional<double>> d_rmse_pct;
  std::vector<std::optional<double>> d_mape_pct;
};

inline std::vector<std::optional<double>> difference_series(const IndexSeries& classical,
                                                            const IndexSeries& modified) {
  std::vector<std::optional<double>> out(classical.values.size());
  for (std::size_t n = 0; n < out.size(); ++n)
    if (classical.values[n] && modified.values[n])
      out[n] = difference_metric(*classical.values[n], *modified.values[n]);
  return out;
}

inline ValidationReport build_report(const Orbit& reference, const Orbit& prediction, const LbeSeries& delta,
                                     std::size_t k_start, std::string lbe_pair) {
  if (reference.samples.size() != prediction.samples.size() || delta.delta.size() != reference.samples.size())
    throw std::invalid_argument("report inputs must share one length");
  ValidationReport r;
  r.provenance = {reference.model_name, prediction.model_name, std::move(lbe_pair)};
  r.k_start = k_start;
  r.y = reference.samples;
  r.yhat = prediction.samples;
  r.lbe = delta;
  r.rmse = running_series(IndexKind::rmse, r.y, r.yhat, nullptr, k_start);
  r.lrmse = running_series(IndexKind::lrmse, r.y, r.yhat, &r.lbe, k_start);
  r.mape = running_series(IndexKind::mape, r.y, r.yhat, nullptr, k_start);
  r.lmape = running_series(IndexKind::lmape, r.y, r.yhat, &r.lbe, k_start);
  r.d_rmse_pct = difference_series(r.rmse, r.lrmse);
  r.d_mape_pct = difference_series(r.mape, r.lmape);
  return r;
}

}  // namespace lbe
