#include <cstdio>
#include <sstream>

#include "pothole/pipeline.hpp"

namespace pothole {

EvalReport evaluate(const BinaryMask& pred, const BinaryMask& gt) {
  if (!pred.same_shape(gt)) throw Error(Errc::dimension_mismatch, "prediction and ground truth differ in shape");
  EvalReport r;
  auto& c = r.counts;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const bool p = pred[i] != 0;
    const bool g = gt[i] != 0;
    if (p && g) {
      ++c.tp;
    } else if (p) {
      ++c.fp;
    } else if (g) {
      ++c.fn;
    } else {
      ++c.tn;
    }
  }
  const auto tp = static_cast<double>(c.tp);
  const bool pred_empty = c.tp + c.fp == 0;
  const bool gt_empty = c.tp + c.fn == 0;
  r.precision = pred_empty ? 1.0 : tp / static_cast<double>(c.tp + c.fp);
  r.recall = gt_empty ? 1.0 : tp / static_cast<double>(c.tp + c.fn);
  r.f_score = r.precision + r.recall > 0.0 ? 2.0 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  if (pred_empty && gt_empty) {
    r.f_score = 1.0;
    r.iou = 1.0;
  } else {
    r.iou = tp / static_cast<double>(c.tp + c.fp + c.fn);
  }
  if (pred_empty != gt_empty) r.f_score = 0.0;
  return r;
}

EvalReport evaluate(const DamageMask& pred, const BinaryMask& gt) { return evaluate(pred.damaged, gt); }

EvalSummary summarize(std::vector<EvalReport> images) {
  EvalSummary s;
  s.images = std::move(images);
  s.mean.id = "mean";
  if (s.images.empty()) return s;
  for (const auto& r : s.images) {
    s.mean.counts.tp += r.counts.tp;
    s.mean.counts.fp += r.counts.fp;
    s.mean.counts.fn += r.counts.fn;
    s.mean.counts.tn += r.counts.tn;
    s.mean.precision += r.precision;
    s.mean.recall += r.recall;
    s.mean.f_score += r.f_score;
    s.mean.iou += r.iou;
  }
  const double n = static_cast<double>(s.images.size());
  s.mean.precision /= n;
  s.mean.recall /= n;
  s.mean.f_score /= n;
  s.mean.iou /= n;
  return s;
}

std::string format_eval_csv(const EvalSummary& summary) {
  std::ostringstream os;
  os << "image,precision,recall,f_score,iou,tp,fp,fn,tn\n";
  auto row = [&](const EvalReport& r) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%.6f,%.6f,%.6f,%.6f", r.precision, r.recall, r.f_score, r.iou);
    os << r.id << ',' << buf << ',' << r.counts.tp << ',' << r.counts.fp << ',' << r.counts.fn << ','
       << r.counts.tn << '\n';
  };
  for (const auto& r : summary.images) row(r);
  row(summary.mean);
  return os.str();
}

}  // namespace pothole
