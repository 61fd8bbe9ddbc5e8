#include "ssl3d/metrics.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include "ssl3d/kernels.hpp"

namespace ssl3d {

void NsdParams::validate() const {
  if (!(std::isfinite(tau) && tau > 0)) throw InvalidArgument("NSD tolerance must be positive");
}

namespace {

std::size_t count_nonzero(const Mask& m) {
  std::size_t n = 0;
  for (auto v : m.data()) n += v != 0;
  return n;
}

}  // namespace

double dsc(const Mask& pred, const Mask& gt) {
  require_same_shape(pred, gt, "dsc");
  const auto p = pred.data();
  const auto g = gt.data();
  std::size_t np = 0, ng = 0, both = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    np += p[i] != 0;
    ng += g[i] != 0;
    both += (p[i] != 0) && (g[i] != 0);
  }
  if (np + ng == 0) return 1.0;
  return 2.0 * static_cast<double>(both) / static_cast<double>(np + ng);
}

EdtResult edt(const Mask& mask, const Spacing& spacing) {
  validate_binary(mask, "edt");
  spacing.validate();
  auto sq = kernels::parallel::edt_squared(mask.data(), mask.dims(), spacing);
  bool empty = true;
  for (auto& v : sq) {
    if (std::isfinite(v)) {
      empty = false;
      v = std::sqrt(v);
    }
  }
  return {DistanceMap(mask.dims(), spacing, std::move(sq)), empty};
}

Mask surface_voxels(const Mask& mask) {
  const Dims d = mask.dims();
  Mask out(d, mask.spacing());
  const auto in = mask.data();
  auto o = out.data();
  auto bg = [&](std::size_t x, std::size_t y, std::size_t z) { return in[d.index(x, y, z)] == 0; };
  for (std::size_t z = 0; z < d.nz; ++z) {
    for (std::size_t y = 0; y < d.ny; ++y) {
      for (std::size_t x = 0; x < d.nx; ++x) {
        if (bg(x, y, z)) continue;
        const bool border = x == 0 || y == 0 || z == 0 || x + 1 == d.nx || y + 1 == d.ny ||
                            z + 1 == d.nz || bg(x - 1, y, z) || bg(x + 1, y, z) ||
                            bg(x, y - 1, z) || bg(x, y + 1, z) || bg(x, y, z - 1) || bg(x, y, z + 1);
        o[d.index(x, y, z)] = border ? 1 : 0;
      }
    }
  }
  return out;
}

double nsd(const Mask& pred, const Mask& gt, const Spacing& spacing, const NsdParams& params) {
  require_same_shape(pred, gt, "nsd");
  if (!approx_equal(pred.spacing(), gt.spacing())) {
    throw ShapeMismatch("nsd: spacing mismatch " + to_string(pred.spacing()) + " vs " +
                        to_string(gt.spacing()));
  }
  params.validate();
  validate_binary(pred, "nsd");
  validate_binary(gt, "nsd");
  const Mask sp = surface_voxels(pred);
  const Mask sg = surface_voxels(gt);
  const std::size_t np = count_nonzero(sp);
  const std::size_t ng = count_nonzero(sg);
  if (np == 0 && ng == 0) return 1.0;
  if (np == 0 || ng == 0) return 0.0;

  const auto to_gt = edt(sg, spacing).distance;
  const auto to_pred = edt(sp, spacing).distance;
  std::size_t within = 0;
  const auto a = sp.data();
  const auto b = sg.data();
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] && to_gt[i] <= params.tau) ++within;
    if (b[i] && to_pred[i] <= params.tau) ++within;
  }
  return static_cast<double>(within) / static_cast<double>(np + ng);
}

MetricReport evaluate_case(const LabelMap& pred, const LabelMap& gt, const NsdParams& params,
                           const std::string& case_id, PresencePolicy policy) {
  require_same_shape(pred, gt, "evaluate_case");
  if (!approx_equal(pred.spacing(), gt.spacing())) {
    throw ShapeMismatch("evaluate_case: spacing mismatch " + to_string(pred.spacing()) + " vs " +
                        to_string(gt.spacing()));
  }
  MetricReport r;
  r.case_id = case_id;
#pragma omp parallel for schedule(dynamic)
  for (int c = 1; c < kNumClasses; ++c) {
    const auto cls = static_cast<std::uint8_t>(c);
    const Mask p = binarize(pred, cls);
    const Mask g = binarize(gt, cls);
    ClassScore s;
    s.pred_present = count_nonzero(p) > 0;
    s.gt_present = count_nonzero(g) > 0;
    s.dsc = dsc(p, g);
    s.nsd = nsd(p, g, gt.spacing(), params);
    r.per_class[c] = s;
  }
  double sd = 0.0, sn = 0.0;
  int n = 0;
  for (int c = kFirstOrgan; c <= kLastOrgan; ++c) {
    const auto& s = r.per_class[c];
    if (policy == PresencePolicy::present && !s.gt_present && !s.pred_present) continue;
    sd += s.dsc;
    sn += s.nsd;
    ++n;
  }
  r.organ_average_dsc = n ? sd / n : 1.0;
  r.organ_average_nsd = n ? sn / n : 1.0;
  return r;
}

namespace {

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

MeanStd population_stats(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - m) * (x - m);
  var /= static_cast<double>(v.size());
  return {m, std::sqrt(var)};
}

}  // namespace

CohortSummary aggregate_cohort(std::span<const MetricReport> reports) {
  if (reports.empty()) throw InvalidArgument("aggregate_cohort: no reports");
  CohortSummary out;
  out.cases.assign(reports.begin(), reports.end());
  auto row = [&](std::string name, int id, auto dsc_of, auto nsd_of) {
    std::vector<double> d, n;
    for (const auto& r : reports) {
      d.push_back(dsc_of(r));
      n.push_back(nsd_of(r));
    }
    const auto ds = population_stats(d);
    const auto ns = population_stats(n);
    out.rows.push_back({std::move(name), id, ds.mean, ds.std, ns.mean, ns.std});
  };
  for (int c = 1; c < kNumClasses; ++c) {
    row(std::string(kClassNames[c]), c, [c](const MetricReport& r) { return r.per_class[c].dsc; },
        [c](const MetricReport& r) { return r.per_class[c].nsd; });
  }
  row("Organ-Average", 0, [](const MetricReport& r) { return r.organ_average_dsc; },
      [](const MetricReport& r) { return r.organ_average_nsd; });
  return out;
}

std::string to_csv(const CohortSummary& summary) {
  std::ostringstream os;
  os << "class,dsc_mean,dsc_std,nsd_mean,nsd_std\n";
  os << std::fixed << std::setprecision(6);
  for (const auto& r : summary.rows) {
    os << r.name << ',' << r.dsc_mean << ',' << r.dsc_std << ',' << r.nsd_mean << ',' << r.nsd_std
       << '\n';
  }
  return os.str();
}

nlohmann::json to_json(const MetricReport& report) {
  nlohmann::json classes = nlohmann::json::object();
  for (int c = 1; c < kNumClasses; ++c) {
    const auto& s = report.per_class[c];
    classes[std::string(kClassNames[c])] = {{"class_id", c},
                                            {"dsc", s.dsc},
                                            {"nsd", s.nsd},
                                            {"gt_present", s.gt_present},
                                            {"pred_present", s.pred_present}};
  }
  return {{"case_id", report.case_id},
          {"per_class", std::move(classes)},
          {"organ_average_dsc", report.organ_average_dsc},
          {"organ_average_nsd", report.organ_average_nsd}};
}

nlohmann::json to_json(const CohortSummary& summary) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : summary.rows) {
    rows.push_back({{"class", r.name},
                    {"class_id", r.class_id},
                    {"dsc_mean", r.dsc_mean},
                    {"dsc_std", r.dsc_std},
                    {"nsd_mean", r.nsd_mean},
                    {"nsd_std", r.nsd_std}});
  }
  nlohmann::json cases = nlohmann::json::array();
  for (const auto& c : summary.cases) cases.push_back(to_json(c));
  return {{"summary", std::move(rows)}, {"cases", std::move(cases)}};
}

}  // namespace ssl3d
