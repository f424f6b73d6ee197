#include "sparseseg/sparseseg.hpp"

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cstring>

namespace py = pybind11;
using namespace sparseseg;

namespace {

using ImageArray = py::array_t<double, py::array::c_style | py::array::forcecast>;
using MaskArray = py::array_t<bool, py::array::c_style | py::array::forcecast>;

GrayImage to_image(const ImageArray& a) {
  if (a.ndim() != 2) throw std::invalid_argument("image must be a 2-D array");
  const auto h = static_cast<int>(a.shape(0));
  const auto w = static_cast<int>(a.shape(1));
  return GrayImage(w, h, std::vector<double>(a.data(), a.data() + a.size()));
}

py::array_t<double> from_image(const GrayImage& img) {
  py::array_t<double> out({img.height(), img.width()});
  if (!img.empty()) std::memcpy(out.mutable_data(), img.data().data(), sizeof(double) * img.data().size());
  return out;
}

Mask to_mask(const MaskArray& a) {
  if (a.ndim() != 2) throw std::invalid_argument("mask must be a 2-D array");
  const auto h = static_cast<int>(a.shape(0));
  const auto w = static_cast<int>(a.shape(1));
  Mask m(w, h);
  auto v = a.unchecked<2>();
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) m.set(r, c, v(r, c));
  return m;
}

py::array_t<bool> from_mask(const Mask& m) {
  py::array_t<bool> out({m.height(), m.width()});
  auto v = out.mutable_unchecked<2>();
  for (int r = 0; r < m.height(); ++r)
    for (int c = 0; c < m.width(); ++c) v(r, c) = m.at(r, c);
  return out;
}

py::list pairs(const std::vector<FrequencyPair>& order) {
  py::list out;
  for (const FrequencyPair& p : order) out.append(py::make_tuple(p.u, p.v));
  return out;
}

py::dict report_dict(const EvalReport& r) {
  py::dict d;
  d["tp"] = r.tp;
  d["fp"] = r.fp;
  d["fn"] = r.fn;
  d["precision"] = r.precision;
  d["recall"] = r.recall;
  return d;
}

}  // namespace

PYBIND11_MODULE(_sparseseg, m) {
  m.doc() = "Block-wise smooth/sparse image segmentation";

  py::register_exception<NotFoundError>(m, "NotFoundError", PyExc_FileNotFoundError);
  py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);
  py::register_exception<WriteError>(m, "WriteError", PyExc_OSError);

  m.def(
      "zigzag_order",
      [](int k, std::optional<int> n) { return pairs(n ? zigzag_order(k, *n) : zigzag_order(k)); },
      py::arg("k"), py::arg("n") = py::none(), "First k (u, v) frequency pairs in zig-zag order.");

  m.def(
      "build_basis", [](int n, int k) { return build_basis(n, k).columns(); }, py::arg("n"),
      py::arg("k"), "N^2 x K orthonormal DCT basis, pixel index x * N + y.");

  m.def(
      "scaled_basis", [](int n, int k, double q) { return scale_basis(build_basis(n, k), q).columns(); },
      py::arg("n"), py::arg("k"), py::arg("q"), "Basis with every column divided by q.");

  m.def("soft_threshold", &soft_threshold, py::arg("x"), py::arg("kappa"));

  py::class_<SolverState>(m, "Solver", "Prefactored ADMM solver for one (N, K, q, rho) setting.")
      .def(py::init([](int n, int k, double q, double rho) {
             return precompute_solver(scale_basis(build_basis(n, k), q), rho);
           }),
           py::arg("n"), py::arg("k"), py::arg("q"), py::arg("rho") = 1.0)
      .def_property_readonly("rho", &SolverState::rho)
      .def("solve", &SolverState::solve, py::arg("rhs"),
           "Solve (G^T G + rho I) y = rhs.")
      .def(
          "decompose",
          [](const SolverState& s, const Eigen::VectorXd& f, double lam, int iterations) {
            const Decomposition d = solve_lasso(f, s, lam, iterations);
            py::dict out;
            out["alpha"] = d.alpha;
            out["sparse"] = d.sparse;
            out["smooth"] = d.smooth;
            out["objective"] = lasso_objective(s.system(), f, d.stacked(), lam);
            out["kkt_residual"] = kkt_residual(d, s.system(), f, lam);
            out["primal_residual"] = d.primal_residual;
            return out;
          },
          py::arg("f"), py::arg("lam"), py::arg("iterations") = 100,
          "Run ADMM on one vectorized block.");

  py::class_<SegmenterConfig>(m, "SegmenterConfig")
      .def(py::init<>())
      .def_readwrite("block_size", &SegmenterConfig::n)
      .def_readwrite("bases", &SegmenterConfig::k)
      .def_readwrite("q", &SegmenterConfig::q)
      .def_readwrite("eps1", &SegmenterConfig::eps1)
      .def_readwrite("eps2", &SegmenterConfig::eps2)
      .def_readwrite("eps3", &SegmenterConfig::eps3)
      .def_readwrite("rho", &SegmenterConfig::rho)
      .def_readwrite("iterations", &SegmenterConfig::iterations)
      .def_readwrite("threads", &SegmenterConfig::threads)
      .def_property(
          "lambda_factor",
          [](const SegmenterConfig& c) -> std::optional<double> {
            if (c.lambda_rule.kind == LambdaRule::Kind::Relative) return c.lambda_rule.value;
            return std::nullopt;
          },
          [](SegmenterConfig& c, double v) { c.lambda_rule = LambdaRule::relative(v); })
      .def_property(
          "lambda_value",
          [](const SegmenterConfig& c) -> std::optional<double> {
            if (c.lambda_rule.kind == LambdaRule::Kind::Absolute) return c.lambda_rule.value;
            return std::nullopt;
          },
          [](SegmenterConfig& c, double v) { c.lambda_rule = LambdaRule::absolute(v); })
      .def("validate", &SegmenterConfig::validate);

  m.def(
      "segment",
      [](const ImageArray& image, const SegmenterConfig& config, bool keep_layers) {
        const GrayImage img = to_image(image);
        ImageSegmentation seg;
        {
          py::gil_scoped_release release;
          seg = segment(img, config, keep_layers);
        }
        py::dict out;
        out["mask"] = from_mask(seg.mask);
        out["flat"] = seg.counts.flat;
        out["least_squares"] = seg.counts.least_squares;
        out["sparse"] = seg.counts.sparse;
        if (keep_layers) {
          out["smooth_layer"] = from_image(seg.smooth_layer);
          out["sparse_layer"] = from_image(seg.sparse_layer);
        }
        return out;
      },
      py::arg("image"), py::arg("config") = SegmenterConfig{}, py::arg("keep_layers") = false,
      "Segment a 2-D luminance array; returns the boolean mask and per-path block counts.");

  m.def(
      "precision_recall",
      [](const MaskArray& pred, const MaskArray& truth) {
        return report_dict(precision_recall(to_mask(pred), to_mask(truth)));
      },
      py::arg("pred"), py::arg("truth"));

  m.def(
      "load_image", [](const std::filesystem::path& p) { return from_image(load_image(p)); },
      py::arg("path"), "Load a PGM or PNG file as a float64 luminance array.");
  m.def(
      "load_mask", [](const std::filesystem::path& p) { return from_mask(load_mask(p)); },
      py::arg("path"));
  m.def(
      "save_mask",
      [](const std::filesystem::path& p, const MaskArray& mask) { save_mask(p, to_mask(mask)); },
      py::arg("path"), py::arg("mask"));
}
