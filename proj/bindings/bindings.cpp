#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "lanesim/experiment.hpp"

namespace py = pybind11;
using namespace lanesim;

namespace {

py::array_t<float> image_to_array(const ImageBuffer& img) {
  py::array_t<float> out({img.height(), img.width(), img.channels()});
  std::memcpy(out.mutable_data(), img.data(), img.size() * sizeof(float));
  return out;
}

ImageBuffer array_to_image(const py::array& arr) {
  auto a = py::array_t<float, py::array::c_style | py::array::forcecast>::ensure(arr);
  if (!a || a.ndim() != 3) throw ConfigError("image array must have shape (h, w, c)");
  ImageBuffer img(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)),
                  static_cast<int>(a.shape(2)));
  std::memcpy(img.data(), a.data(), img.size() * sizeof(float));
  return img;
}

py::dict sample_to_dict(const SampleRecord& rec, const StoreHeader& h) {
  py::dict d;
  py::array_t<float> patch({static_cast<int>(h.patch_h), static_cast<int>(h.patch_w),
                            static_cast<int>(h.patch_c)});
  std::memcpy(patch.mutable_data(), rec.patch.data(), rec.patch.size() * sizeof(float));
  d["patch"] = patch;
  d["label"] = py::array_t<float>(static_cast<py::ssize_t>(rec.label.size()), rec.label.data());
  d["maneuver"] = rec.meta.maneuver;
  d["recording_index"] = rec.meta.recording_index;
  d["frame_index"] = rec.meta.frame_index;
  d["camera"] = rec.meta.camera;
  d["shift_right_m"] = rec.meta.shift_right_m;
  d["yaw_rad"] = rec.meta.yaw_rad;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Lane-keeping data and evaluation machinery";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<RuntimeError>(m, "RuntimeError", PyExc_RuntimeError);

  py::class_<CameraIntrinsics>(m, "CameraIntrinsics")
      .def(py::init<>())
      .def_readwrite("fx", &CameraIntrinsics::fx)
      .def_readwrite("fy", &CameraIntrinsics::fy)
      .def_readwrite("cx", &CameraIntrinsics::cx)
      .def_readwrite("cy", &CameraIntrinsics::cy)
      .def_readwrite("width", &CameraIntrinsics::width)
      .def_readwrite("height", &CameraIntrinsics::height);

  py::class_<CameraPose>(m, "CameraPose")
      .def(py::init<>())
      .def_readwrite("position", &CameraPose::position)
      .def_readwrite("yaw", &CameraPose::yaw)
      .def_readwrite("pitch_down", &CameraPose::pitch_down)
      .def_readwrite("roll", &CameraPose::roll);

  py::class_<Pose2>(m, "Pose2")
      .def(py::init<>())
      .def(py::init([](double x, double y, double psi) { return Pose2{x, y, psi}; }),
           py::arg("x"), py::arg("y"), py::arg("psi"))
      .def_readwrite("x", &Pose2::x)
      .def_readwrite("y", &Pose2::y)
      .def_readwrite("psi", &Pose2::psi);

  m.def("standard_intrinsics", &standard_intrinsics);
  m.def("standard_camera_mount", &standard_camera_mount);

  py::class_<RoiSpec>(m, "RoiSpec")
      .def(py::init<>())
      .def_readwrite("hfov_rad", &RoiSpec::hfov_rad)
      .def_readwrite("ground_width_m", &RoiSpec::ground_width_m)
      .def_readwrite("out_w", &RoiSpec::out_w)
      .def_readwrite("out_h", &RoiSpec::out_h);

  py::enum_<PatchSpec::Kind>(m, "PatchKind")
      .value("regular", PatchSpec::Kind::regular)
      .value("multires", PatchSpec::Kind::multires);

  py::class_<PatchSpec>(m, "PatchSpec")
      .def(py::init<>())
      .def_readwrite("kind", &PatchSpec::kind)
      .def_readwrite("roi", &PatchSpec::roi)
      .def_readwrite("out_w", &PatchSpec::out_w)
      .def_readwrite("out_h", &PatchSpec::out_h)
      .def_readwrite("ratio_w", &PatchSpec::ratio_w)
      .def_readwrite("ratio_h", &PatchSpec::ratio_h)
      .def_readwrite("channels_hint", &PatchSpec::channels_hint);

  py::class_<WorldScene>(m, "WorldScene")
      .def_property_readonly("length_m", [](const WorldScene& s) { return s.centerline.length(); })
      .def_property_readonly("billboard_count",
                             [](const WorldScene& s) { return s.billboards.size(); })
      .def_readonly("seed", &WorldScene::seed);

  m.def("scene_from_config_text", [](const std::string& text) {
    return scene_from_config(Config::from_string(text));
  });

  m.def(
      "render_frame",
      [](const WorldScene& scene, const CameraPose& camera, const CameraIntrinsics& K) {
        return image_to_array(render_frame(scene, camera, K));
      },
      py::arg("scene"), py::arg("camera"), py::arg("K"));

  m.def(
      "camera_world_pose",
      [](const Pose2& vehicle, const CameraPose& mount) {
        return camera_world_pose(vehicle, mount);
      },
      py::arg("vehicle"), py::arg("mount"));

  m.def(
      "warp_viewpoint",
      [](const py::array& src, const CameraPose& src_pose, const CameraPose& dst_pose,
         const CameraIntrinsics& K) {
        const WarpResult r = warp_viewpoint(array_to_image(src), src_pose, dst_pose, K);
        return py::make_tuple(image_to_array(r.image), image_to_array(r.mask), r.valid_fraction);
      },
      py::arg("src"), py::arg("src_pose"), py::arg("dst_pose"), py::arg("K"));

  m.def(
      "build_patch",
      [](const py::array& img, const CameraIntrinsics& K, const CameraPose& camera,
         const PatchSpec& spec) {
        return image_to_array(build_patch(array_to_image(img), K, camera, spec));
      },
      py::arg("image"), py::arg("K"), py::arg("camera"), py::arg("spec"));

  m.def(
      "extract_local_trajectory",
      [](const std::vector<std::pair<double, double>>& path, const Pose2& pose) {
        std::vector<Eigen::Vector2d> pts;
        pts.reserve(path.size());
        for (const auto& [x, y] : path) pts.emplace_back(x, y);
        const TrajectoryLabel label = extract_local_trajectory(ArcPolyline(std::move(pts)), pose);
        py::array_t<double> out({static_cast<py::ssize_t>(label.points.size()),
                                 static_cast<py::ssize_t>(3)});
        auto view = out.mutable_unchecked<2>();
        for (size_t i = 0; i < label.points.size(); ++i)
          for (int j = 0; j < 3; ++j) view(static_cast<py::ssize_t>(i), j) = label.points[i][j];
        return out;
      },
      py::arg("path_points"), py::arg("pose"));

  py::class_<StoreReader>(m, "StoreReader")
      .def(py::init<const std::filesystem::path&>())
      .def_property_readonly("size", &StoreReader::size)
      .def_property_readonly("patch_shape",
                             [](const StoreReader& r) {
                               return py::make_tuple(r.header().patch_h, r.header().patch_w,
                                                     r.header().patch_c);
                             })
      .def_property_readonly("label_dim",
                             [](const StoreReader& r) { return r.header().label_dim; })
      .def_property_readonly(
          "recording_ids", [](const StoreReader& r) { return r.header().recording_ids; })
      .def("read", [](StoreReader& r, uint64_t i) { return sample_to_dict(r.read(i), r.header()); });

  py::class_<RidgeModel>(m, "RidgeModel")
      .def_static("load", &RidgeModel::load)
      .def("save", &RidgeModel::save)
      .def_property_readonly("lambda_", [](const RidgeModel& m_) { return m_.lambda; })
      .def_property_readonly("patch", [](const RidgeModel& m_) { return m_.patch; })
      .def("predict", [](const RidgeModel& m_, const py::array& patch) {
        const TrajectoryPrediction p = m_.predict(array_to_image(patch));
        return py::array_t<double>(static_cast<py::ssize_t>(p.size()), p.data());
      });

  m.def(
      "train_ridge",
      [](const std::filesystem::path& store, double lambda, const PatchSpec& patch) {
        StoreReader reader(store);
        return train_ridge(reader, lambda, patch);
      },
      py::arg("store"), py::arg("lambda_"), py::arg("patch"));

  m.def("mapa_score_pct", [](double y_l, double y_r, double y_hl, double y_hr) {
    return mapa_score_pct(MapaInputs{y_l, y_r, y_hl, y_hr});
  });
  m.def("lateral_precision_pct", &lateral_precision_pct);
  m.def("comfort_score", &comfort_score, py::arg("lateral_accel"), py::arg("dt_s"),
        py::arg("k") = 20.0);

  m.def(
      "pure_pursuit",
      [](const std::vector<double>& prediction, double wheelbase, double track,
         double lookahead) {
        return pure_pursuit(prediction, VehicleSpec{wheelbase, track}, lookahead);
      },
      py::arg("prediction"), py::arg("wheelbase_m"), py::arg("track_m"),
      py::arg("lookahead_m"));
}
