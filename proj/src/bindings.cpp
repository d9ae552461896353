#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "vidmem/config.hpp"
#include "vidmem/gating.hpp"
#include "vidmem/membank.hpp"
#include "vidmem/metrics.hpp"
#include "vidmem/simworld.hpp"
#include "vidmem/trajectory.hpp"

namespace py = pybind11;
using namespace vidmem;

PYBIND11_MODULE(_core, m) {
  m.doc() = "geometric memory gating for long-horizon video rollouts";

  py::class_<Intrinsics>(m, "Intrinsics")
      .def(py::init<>())
      .def_readwrite("fx", &Intrinsics::fx)
      .def_readwrite("fy", &Intrinsics::fy)
      .def_readwrite("cx", &Intrinsics::cx)
      .def_readwrite("cy", &Intrinsics::cy)
      .def_readwrite("width", &Intrinsics::width)
      .def_readwrite("height", &Intrinsics::height);

  py::class_<CameraPose>(m, "CameraPose")
      .def(py::init<const Eigen::Matrix3d&, const Eigen::Vector3d&,
                    const Intrinsics&>(),
           py::arg("rotation"), py::arg("center"),
           py::arg("intrinsics") = Intrinsics{})
      .def_static("identity", &CameraPose::identity,
                  py::arg("intrinsics") = Intrinsics{})
      .def_property_readonly("rotation", &CameraPose::rotation)
      .def_property_readonly("center", &CameraPose::center)
      .def_property_readonly("intrinsics", &CameraPose::intrinsics);

  py::class_<OverlapConfig>(m, "OverlapConfig")
      .def(py::init<>())
      .def_readwrite("grid", &OverlapConfig::grid)
      .def_readwrite("sample_depth", &OverlapConfig::sample_depth)
      .def_readwrite("scene_diameter", &OverlapConfig::scene_diameter)
      .def_readwrite("distance_weight", &OverlapConfig::distance_weight);

  m.def("project_point",
        [](const CameraPose& pose, const Eigen::Vector3d& p) {
          const Projection proj = project_point(pose, p);
          return py::make_tuple(proj.pixel, proj.depth);
        },
        py::arg("pose"), py::arg("world_point"));
  m.def("fov_overlap", &fov_overlap, py::arg("target"), py::arg("history"),
        py::arg("config") = OverlapConfig{});
  m.def("translation_distance", &translation_distance, py::arg("target"),
        py::arg("history"), py::arg("config") = OverlapConfig{});
  m.def("plucker_embed",
        [](const CameraPose& pose, int height, int width) {
          const PluckerMap map = plucker_embed(pose, height, width);
          py::array_t<double> arr({height, width, 6});
          auto view = arr.mutable_unchecked<3>();
          for (int r = 0; r < height; ++r)
            for (int c = 0; c < width; ++c)
              for (int k = 0; k < 6; ++k) view(r, c, k) = map.at(r, c)[k];
          return arr;
        },
        py::arg("pose"), py::arg("height"), py::arg("width"));

  py::class_<GatingConfig>(m, "GatingConfig")
      .def(py::init<>())
      .def_readwrite("score_threshold", &GatingConfig::score_threshold)
      .def_readwrite("distance_threshold", &GatingConfig::distance_threshold)
      .def_readwrite("temporal_threshold", &GatingConfig::temporal_threshold)
      .def_readwrite("overlap", &GatingConfig::overlap);

  py::class_<GateDecision>(m, "GateDecision")
      .def_readonly("target_index", &GateDecision::target_index)
      .def_readonly("score", &GateDecision::score)
      .def_readonly("matched", &GateDecision::matched)
      .def_readonly("active", &GateDecision::active)
      .def_property_readonly(
          "reason", [](const GateDecision& d) { return to_string(d.reason); });

  m.def("relevance_matrix", &relevance_matrix, py::arg("targets"),
        py::arg("history"), py::arg("config") = GatingConfig{});
  m.def("compute_gates", &compute_gates, py::arg("targets"),
        py::arg("history"), py::arg("config") = GatingConfig{});

  py::class_<PatternParams>(m, "PatternParams")
      .def(py::init<>())
      .def_readwrite("frames", &PatternParams::frames)
      .def_readwrite("yaw_amplitude_deg", &PatternParams::yaw_amplitude_deg)
      .def_readwrite("cycles", &PatternParams::cycles)
      .def_readwrite("step", &PatternParams::step)
      .def_readwrite("offset", &PatternParams::offset)
      .def_readwrite("intrinsics", &PatternParams::intrinsics);

  py::class_<Trajectory>(m, "Trajectory")
      .def_readonly("poses", &Trajectory::poses)
      .def_readonly("segment_length", &Trajectory::segment_length)
      .def_property_readonly(
          "metadata", [](const Trajectory& t) { return t.metadata.dump(); });

  m.def("gen_pattern",
        [](const std::string& kind, const PatternParams& params,
           std::uint64_t seed) {
          return gen_pattern(pattern_kind_from_string(kind), params, seed);
        },
        py::arg("kind"), py::arg("params") = PatternParams{},
        py::arg("seed") = 0);
  m.def("import_re10k", &import_re10k, py::arg("text"));
  m.def("export_re10k", &export_re10k, py::arg("trajectory"));

  py::class_<TrainingPair>(m, "TrainingPair")
      .def_readonly("history", &TrainingPair::history)
      .def_readonly("target", &TrainingPair::target)
      .def_readonly("stride", &TrainingPair::stride);
  py::class_<PseudoLoop>(m, "PseudoLoop")
      .def_readonly("frame_order", &PseudoLoop::frame_order)
      .def_readonly("pairs", &PseudoLoop::pairs);
  m.def("synth_pseudo_loop", &synth_pseudo_loop, py::arg("video_length"),
        py::arg("stride"));
  m.def("apply_history_dropout", &apply_history_dropout, py::arg("pairs"),
        py::arg("rate"), py::arg("seed") = 0);

  py::class_<Frame>(m, "Frame", py::buffer_protocol())
      .def(py::init<int, int>(), py::arg("width"), py::arg("height"))
      .def_property_readonly("width", &Frame::width)
      .def_property_readonly("height", &Frame::height)
      .def_buffer([](Frame& f) {
        return py::buffer_info(f.data().data(), 1,
                               py::format_descriptor<std::uint8_t>::format(),
                               3, {f.height(), f.width(), 3},
                               {static_cast<std::size_t>(f.width()) * 3,
                                std::size_t{3}, std::size_t{1}});
      });

  py::class_<SceneSpec>(m, "SceneSpec")
      .def(py::init<>())
      .def_readwrite("seed", &SceneSpec::seed)
      .def_readwrite("box_count", &SceneSpec::box_count)
      .def_readwrite("texture_cell", &SceneSpec::texture_cell);
  m.def("render", &render, py::arg("scene"), py::arg("pose"), py::arg("width"),
        py::arg("height"));

  py::class_<DriftConfig>(m, "DriftConfig")
      .def(py::init<>())
      .def_readwrite("sigma0", &DriftConfig::sigma0);

  py::class_<EpisodeConfig>(m, "EpisodeConfig")
      .def(py::init<>())
      .def_readwrite("gating", &EpisodeConfig::gating)
      .def_readwrite("drift", &EpisodeConfig::drift)
      .def_readwrite("segment_length", &EpisodeConfig::segment_length)
      .def_readwrite("width", &EpisodeConfig::width)
      .def_readwrite("height", &EpisodeConfig::height)
      .def_readwrite("memory_enabled", &EpisodeConfig::memory_enabled);

  py::class_<EpisodeRecord>(m, "EpisodeRecord")
      .def_readonly("poses", &EpisodeRecord::poses)
      .def_readonly("ground_truth", &EpisodeRecord::ground_truth)
      .def_readonly("generated", &EpisodeRecord::generated)
      .def_property_readonly("gates",
                             [](const EpisodeRecord& e) {
                               std::vector<int> gates;
                               for (const auto& f : e.frames)
                                 gates.push_back(f.decision.active ? 1 : 0);
                               return gates;
                             })
      .def_property_readonly("steps_since_anchor", [](const EpisodeRecord& e) {
        std::vector<int> steps;
        for (const auto& f : e.frames) steps.push_back(f.steps_since_anchor);
        return steps;
      });

  m.def("run_episode", &run_episode, py::arg("scene"), py::arg("trajectory"),
        py::arg("config") = EpisodeConfig{}, py::arg("seed") = 0);
  m.def("save_episode", &save_episode, py::arg("episode"), py::arg("dir"));

  m.def("psnr", &psnr, py::arg("a"), py::arg("b"), py::arg("peak") = 1.0);
  m.def("ssim",
        [](const Frame& a, const Frame& b) { return ssim(a, b); },
        py::arg("a"), py::arg("b"));

  py::class_<RevisitPair>(m, "RevisitPair")
      .def_readonly("return_index", &RevisitPair::return_index)
      .def_readonly("first_index", &RevisitPair::first_index);
  py::class_<RevisitPairing>(m, "RevisitPairing")
      .def_readonly("pairs", &RevisitPairing::pairs)
      .def_readonly("tolerance", &RevisitPairing::tolerance);
  m.def("pair_revisits",
        [](const Trajectory& t, double tol) { return pair_revisits(t, tol); },
        py::arg("trajectory"), py::arg("tolerance") = 1e-6);

  py::class_<ConsistencyReport>(m, "ConsistencyReport")
      .def_readonly("mean_psnr", &ConsistencyReport::mean_psnr)
      .def_readonly("min_psnr", &ConsistencyReport::min_psnr)
      .def_readonly("mean_ssim", &ConsistencyReport::mean_ssim)
      .def_readonly("min_ssim", &ConsistencyReport::min_ssim)
      .def_property_readonly("pair_count", [](const ConsistencyReport& r) {
        return r.pairs.size();
      })
      .def_property_readonly("pairs", [](const ConsistencyReport& r) {
        py::list out;
        for (const PairMetrics& pm : r.pairs)
          out.append(py::make_tuple(pm.pair.return_index, pm.pair.first_index,
                                    pm.psnr, pm.ssim));
        return out;
      });
  m.def("evaluate", &evaluate, py::arg("episode"), py::arg("pairing"));
}
