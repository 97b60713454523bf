#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <iostream>
#include <sstream>

#include "crownkit/allometry.hpp"
#include "crownkit/cli.hpp"
#include "crownkit/error.hpp"
#include "crownkit/extraction.hpp"
#include "crownkit/geometry.hpp"
#include "crownkit/heads.hpp"
#include "crownkit/io.hpp"
#include "crownkit/losses.hpp"
#include "crownkit/metrics.hpp"
#include "crownkit/raster.hpp"
#include "crownkit/synth.hpp"

namespace py = pybind11;
using namespace crownkit;

namespace {

using BoolArray = py::array_t<bool, py::array::c_style | py::array::forcecast>;
using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;

PixelMask mask_from_array(const BoolArray& a, int origin_row, int origin_col, double pixel_size) {
  if (a.ndim() != 2) throw py::value_error("mask must be 2-D");
  const auto v = a.unchecked<2>();
  PixelMask m({origin_row, origin_col}, static_cast<int>(v.shape(0)), static_cast<int>(v.shape(1)),
              pixel_size);
  for (py::ssize_t r = 0; r < v.shape(0); ++r)
    for (py::ssize_t c = 0; c < v.shape(1); ++c) m.set(static_cast<int>(r), static_cast<int>(c), v(r, c));
  return m;
}

BoolArray mask_to_array(const PixelMask& m) {
  BoolArray out({m.rows(), m.cols()});
  auto v = out.mutable_unchecked<2>();
  for (int r = 0; r < m.rows(); ++r)
    for (int c = 0; c < m.cols(); ++c) v(r, c) = m.at(r, c);
  return out;
}

Raster raster_from_array(const FloatArray& a, const GridRef& grid, float nodata) {
  if (a.ndim() != 2 || a.shape(0) != grid.height || a.shape(1) != grid.width)
    throw py::value_error("array shape must be (grid.height, grid.width)");
  return Raster(grid, std::vector<float>(a.data(), a.data() + a.size()), nodata);
}

FloatArray raster_to_array(const Raster& r) {
  FloatArray out({r.height(), r.width()});
  std::copy(r.values().begin(), r.values().end(), out.mutable_data());
  return out;
}

py::dict regression_dict(const RegressionReport& r) {
  py::dict d;
  d["mae"] = r.mae;
  d["rmse"] = r.rmse;
  d["msle"] = r.msle;
  d["delta"] = r.delta;
  d["delta_threshold"] = r.delta_threshold;
  d["msd"] = r.msd;
  d["n"] = r.n;
  return d;
}

}  // namespace

PYBIND11_MODULE(_crownkit, m) {
  m.doc() = "Canopy height extraction, allometry, metrics, losses and prediction-head tooling.";

  static py::exception<Error> error(m, "CrownkitError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::IoError) {
        PyErr_SetString(PyExc_OSError, e.what());
      } else {
        error(e.what());
      }
    }
  });

  py::class_<GridRef>(m, "GridRef")
      .def(py::init([](int width, int height, double pixel_size, double x_ll, double y_ll) {
             return GridRef{width, height, pixel_size, x_ll, y_ll};
           }),
           py::arg("width"), py::arg("height"), py::arg("pixel_size") = 1.0, py::arg("x_ll") = 0.0,
           py::arg("y_ll") = 0.0)
      .def_readwrite("width", &GridRef::width)
      .def_readwrite("height", &GridRef::height)
      .def_readwrite("pixel_size", &GridRef::pixel_size)
      .def_readwrite("x_ll", &GridRef::x_ll)
      .def_readwrite("y_ll", &GridRef::y_ll)
      .def("pixel_center", [](const GridRef& g, double row, double col) {
        const Point2 p = g.pixel_center(row, col);
        return py::make_tuple(p.x, p.y);
      });

  py::class_<PixelMask>(m, "PixelMask")
      .def(py::init(&mask_from_array), py::arg("bits"), py::arg("origin_row") = 0,
           py::arg("origin_col") = 0, py::arg("pixel_size") = 1.0)
      .def_property_readonly("origin", [](const PixelMask& k) {
        return py::make_tuple(k.origin().row, k.origin().col);
      })
      .def_property_readonly("pixel_size", &PixelMask::pixel_size)
      .def("count", &PixelMask::count)
      .def("to_array", &mask_to_array)
      .def("pixels", [](const PixelMask& k) {
        std::vector<std::pair<int, int>> out;
        for (const auto& p : k.pixels()) out.emplace_back(p.row, p.col);
        return out;
      });

  py::class_<RotatedRect>(m, "RotatedRect")
      .def_readonly("length", &RotatedRect::length)
      .def_readonly("width", &RotatedRect::width)
      .def_readonly("angle", &RotatedRect::angle)
      .def_readonly("center_row", &RotatedRect::center_row)
      .def_readonly("center_col", &RotatedRect::center_col);

  m.def(
      "rasterize_polygon",
      [](const std::vector<std::pair<double, double>>& ring, const GridRef& grid) {
        Ring r;
        for (const auto& [x, y] : ring) r.push_back({x, y});
        return rasterize_polygon(r, grid);
      },
      py::arg("ring"), py::arg("grid"));
  m.def("buffer_mask", &buffer_mask, py::arg("mask"), py::arg("scale") = 0.1);
  m.def("characteristic_length", &characteristic_length);
  m.def("min_rotated_rect", &min_rotated_rect);
  m.def("crown_radius", [](const RotatedRect& r) { return crown_radius(r); });

  m.def(
      "percentile", [](const std::vector<double>& v, double p) { return percentile(v, p); },
      py::arg("values"), py::arg("p"));

  m.def(
      "extract_height",
      [](const FloatArray& chm, const GridRef& grid, const PixelMask& mask, double percentile_p,
         bool use_max, double buffer_scale, double fallback_scale, float nodata) {
        ExtractionConfig cfg;
        cfg.percentile_p = percentile_p;
        cfg.use_max = use_max;
        cfg.buffer_scale = buffer_scale;
        cfg.fallback_scale = fallback_scale;
        const HeightLabel l = extract_height(raster_from_array(chm, grid, nodata), mask, cfg);
        return py::make_tuple(l.height_m ? py::cast(*l.height_m) : py::none(), l.fallback_used());
      },
      py::arg("chm"), py::arg("grid"), py::arg("mask"), py::arg("percentile") = 99.0,
      py::arg("use_max") = false, py::arg("buffer_scale") = 0.1, py::arg("fallback_scale") = 0.05,
      py::arg("nodata") = Raster::kDefaultNodata);

  m.def(
      "fit_allometry",
      [](const std::vector<std::tuple<std::string, double, double>>& samples, bool pool_fallback) {
        std::vector<AllometrySample> s;
        for (const auto& [c, r, h] : samples) s.push_back({c, r, h});
        AllometryFitOptions opt;
        opt.pool_fallback = pool_fallback;
        std::map<std::string, std::pair<double, double>> out;
        for (const auto& [name, p] : fit_allometry(s, opt).classes)
          out[name] = {p.slope, p.intercept};
        return out;
      },
      py::arg("samples"), py::arg("pool_fallback") = false,
      "Returns {class: (slope, intercept)} for ln h = slope ln r + intercept.");
  m.def(
      "predict_height",
      [](double slope, double intercept, double radius_m) {
        AllometryParams p;
        p.classes["c"] = {slope, intercept, 2, false};
        return predict_height(p, "c", radius_m);
      },
      py::arg("slope"), py::arg("intercept"), py::arg("radius_m"));

  m.def(
      "regression_metrics",
      [](const std::vector<double>& preds, const std::vector<double>& truths, double threshold) {
        return regression_dict(regression_metrics(preds, truths, threshold));
      },
      py::arg("preds"), py::arg("truths"), py::arg("threshold") = 1.25);
  m.def(
      "classification_metrics",
      [](const std::vector<int>& preds, const std::vector<int>& truths, int num_classes) {
        const auto r = classification_metrics(preds, truths, num_classes);
        std::vector<double> f1;
        for (const auto& s : r.per_class) f1.push_back(s.f1);
        py::dict d;
        d["macro_f1"] = r.macro_f1;
        d["macro_acc"] = r.macro_acc;
        d["f1"] = f1;
        d["confusion"] = r.confusion;
        return d;
      },
      py::arg("preds"), py::arg("truths"), py::arg("num_classes"));

  m.def("smooth_l1", &smooth_l1, py::arg("pred"), py::arg("truth"));
  m.def(
      "cross_entropy", [](const std::vector<double>& p, int c) { return cross_entropy(p, c); },
      py::arg("probs"), py::arg("target"));
  m.def(
      "focal_loss",
      [](const std::vector<double>& p, int c, double gamma) { return focal_loss(p, c, gamma); },
      py::arg("probs"), py::arg("target"), py::arg("gamma") = 2.0);
  m.def(
      "dwa_weights",
      [](const std::vector<double>& lh, const std::vector<double>& ls, double t, int epoch) {
        const TaskWeights w = dwa_weights({lh, ls}, t, epoch);
        return py::make_tuple(w.height, w.species);
      },
      py::arg("height_losses"), py::arg("species_losses"), py::arg("temperature"), py::arg("epoch"));
  m.def(
      "pcgrad",
      [](const std::vector<double>& a, const std::vector<double>& b) { return pcgrad(a, b); },
      py::arg("grad_a"), py::arg("grad_b"));

  m.def(
      "generate_scene",
      [](const std::string& spec_json, std::uint64_t seed) {
        const Scene s = generate_scene(io::scene_spec_from_json(io::parse_json(spec_json, "<spec>")), seed);
        std::vector<py::dict> truth;
        for (const auto& t : s.truth) {
          py::dict d;
          d["crown_id"] = t.crown_id;
          d["class_name"] = t.class_name;
          d["height_m"] = t.height_m;
          d["radius_m"] = t.radius_m;
          d["center"] = py::make_tuple(t.center.x, t.center.y);
          truth.push_back(d);
        }
        return py::make_tuple(raster_to_array(s.chm), truth);
      },
      py::arg("spec_json"), py::arg("seed") = 0);

  m.def(
      "gradient_check",
      [](const std::string& variant, std::uint64_t seed) {
        std::ostringstream out, err;
        const int code = cli::run({"crownkit", "gradcheck", "--variant", variant, "--seed",
                                   std::to_string(seed)},
                                  out, err);
        if (code == 1 && !err.str().empty()) throw Error(ErrorCode::InvalidArgument, err.str());
        return code == 0;
      },
      py::arg("variant") = "all", py::arg("seed") = 0);

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::vector<std::string> full{"crownkit"};
        full.insert(full.end(), args.begin(), args.end());
        std::ostringstream out, err;
        const int code = cli::run(full, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs a CLI subcommand; returns (exit_code, stdout, stderr).");

#ifdef CROWNKIT_VERSION
  m.attr("__version__") = CROWNKIT_VERSION;
#else
  m.attr("__version__") = "dev";
#endif
}
