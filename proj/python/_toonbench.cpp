#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <string>

#include "toonbench/dataset.hpp"
#include "toonbench/error.hpp"
#include "toonbench/image_io.hpp"
#include "toonbench/loss.hpp"
#include "toonbench/metrics.hpp"

namespace py = pybind11;
using namespace toonbench;

namespace {

using U8Array = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;

AlphaMask to_mask(const U8Array& a) {
  if (a.ndim() != 2) throw Error(ErrorCode::InvalidArgument, "expected a 2-D uint8 array");
  const auto h = static_cast<int>(a.shape(0));
  const auto w = static_cast<int>(a.shape(1));
  const std::uint8_t* data = a.data();
  return AlphaMask(w, h, std::vector<std::uint8_t>(data, data + a.size()));
}

MaskPair to_pair(const U8Array& pred, const U8Array& gt) { return MaskPair(to_mask(pred), to_mask(gt)); }

U8Array to_array(const AlphaMask& m) {
  U8Array out({m.height(), m.width()});
  std::copy(m.values().begin(), m.values().end(), out.mutable_data());
  return out;
}

ThresholdStatistic parse_statistic(const std::string& s) {
  if (s == "max") return ThresholdStatistic::Max;
  if (s == "mean") return ThresholdStatistic::Mean;
  throw Error(ErrorCode::InvalidArgument, "statistic must be 'max' or 'mean'");
}

}  // namespace

PYBIND11_MODULE(_toonbench, m) {
  m.doc() = "Segmentation metrics, loss scoring and dataset splitting for alpha mattes.";

  PYBIND11_CONSTINIT static py::gil_safe_call_once_and_store<py::object> error_type;
  error_type.call_once_and_store_result(
      [&]() { return py::object(py::exception<Error>(m, "ToonbenchError")); });
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      const py::object& type = error_type.get_stored();
      py::object err = type(e.what());
      err.attr("code") = std::string(to_string(e.code()));
      PyErr_SetObject(type.ptr(), err.ptr());
    }
  });

  m.def(
      "pixel_accuracy",
      [](const U8Array& pred, const U8Array& gt, int delta, int foreground_threshold,
         int erosion_iterations) {
        PixelAccuracyConfig cfg{delta, foreground_threshold, erosion_iterations};
        return pixel_accuracy(to_pair(pred, gt), cfg).score;
      },
      py::arg("pred"), py::arg("gt"), py::arg("delta") = 10, py::arg("foreground_threshold") = 128,
      py::arg("erosion_iterations") = 1);
  m.def("mae", [](const U8Array& p, const U8Array& g) { return mae(to_pair(p, g)).value; },
        py::arg("pred"), py::arg("gt"));
  m.def("mse", [](const U8Array& p, const U8Array& g) { return mse(to_pair(p, g)).value; },
        py::arg("pred"), py::arg("gt"));
  m.def(
      "f_measure",
      [](const U8Array& p, const U8Array& g, const std::string& stat) {
        return f_measure(to_pair(p, g), parse_statistic(stat)).value;
      },
      py::arg("pred"), py::arg("gt"), py::arg("statistic") = "max");
  m.def(
      "e_measure",
      [](const U8Array& p, const U8Array& g, const std::string& stat) {
        return e_measure(to_pair(p, g), parse_statistic(stat)).value;
      },
      py::arg("pred"), py::arg("gt"), py::arg("statistic") = "max");
  m.def("s_measure", [](const U8Array& p, const U8Array& g) { return s_measure(to_pair(p, g)).value; },
        py::arg("pred"), py::arg("gt"));
  m.def(
      "weighted_f_measure",
      [](const U8Array& p, const U8Array& g) { return weighted_f_measure(to_pair(p, g)).value; },
      py::arg("pred"), py::arg("gt"));
  m.def(
      "boundary_iou",
      [](const U8Array& p, const U8Array& g, double ratio) {
        return boundary_iou(to_pair(p, g), ratio).value;
      },
      py::arg("pred"), py::arg("gt"), py::arg("dilation_ratio") = kDefaultBoundaryDilationRatio);
  m.def(
      "evaluate_all",
      [](const U8Array& p, const U8Array& g) {
        py::dict out;
        for (const MetricResult& r : evaluate_all(to_pair(p, g))) {
          out[py::str(std::string(metric_name(r.id)))] =
              r.value ? py::object(py::float_(*r.value)) : py::object(py::none());
        }
        return out;
      },
      py::arg("pred"), py::arg("gt"), "All eight metrics; undefined ones map to None.");

  m.def("ssim_loss", [](const U8Array& p, const U8Array& g) { return ssim_loss(to_pair(p, g)); },
        py::arg("pred"), py::arg("gt"));
  m.def("iou_loss", [](const U8Array& p, const U8Array& g) { return iou_loss(to_pair(p, g)); },
        py::arg("pred"), py::arg("gt"));
  m.def("bce_score", [](const U8Array& p, const U8Array& g) { return bce_score(to_pair(p, g)); },
        py::arg("pred"), py::arg("gt"));
  m.def(
      "composite_loss",
      [](const U8Array& p, const U8Array& g, double w_ssim, double w_mae, double w_iou) {
        const LossBreakdown b = composite_loss(to_pair(p, g), {w_ssim, w_mae, w_iou});
        py::dict out;
        out["ssim"] = b.ssim;
        out["mae"] = b.mae;
        out["iou"] = b.iou;
        out["bce"] = b.bce;
        out["total"] = b.total;
        return out;
      },
      py::arg("pred"), py::arg("gt"), py::arg("ssim") = 10.0, py::arg("mae") = 90.0,
      py::arg("iou") = 0.25);

  m.def(
      "split_counts",
      [](std::size_t n) {
        const SplitCounts c = split_counts(n);
        return py::make_tuple(c.train, c.validation, c.test);
      },
      py::arg("n"), "(train, validation, test) sizes for a category of n images.");

  m.def("load_mask", [](const std::filesystem::path& p) { return to_array(load_mask(p)); }, py::arg("path"));
  m.def(
      "save_mask", [](const std::filesystem::path& p, const U8Array& a) { save_mask(p, to_mask(a)); },
      py::arg("path"), py::arg("mask"));
}
