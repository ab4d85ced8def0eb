// SPDX-License-Identifier: Apache-2.0
// Thin pybind11 layer over the C++ library. Structured values cross the
// boundary as JSON text; the Python package turns them into dicts.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "disputekit/bench.hpp"
#include "disputekit/config.hpp"
#include "disputekit/embedder.hpp"
#include "disputekit/error.hpp"
#include "disputekit/eval.hpp"
#include "disputekit/retrieval.hpp"
#include "disputekit/reward.hpp"
#include "disputekit/road_network.hpp"

#include <json.hpp>

#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace py = pybind11;
namespace dk = disputekit;
using nlohmann::json;

namespace {

dk::RewardConfig reward_config(double lambda_ans, double lambda_fmt, double beta, bool ordinal) {
    dk::RewardConfig cfg;
    cfg.lambda_ans = lambda_ans;
    cfg.lambda_fmt = lambda_fmt;
    cfg.beta = beta;
    cfg.ordinal = ordinal;
    cfg.validate();
    return cfg;
}

py::list points_list(const dk::Polyline& line) {
    py::list out;
    for (const auto& p : line.points) {
        out.append(py::make_tuple(p.x, p.y));
    }
    return out;
}

py::list neighbor_list(const std::vector<dk::Neighbor>& neighbors) {
    py::list out;
    for (const auto& n : neighbors) {
        py::dict d;
        d["id"] = n.id;
        d["similarity"] = n.similarity;
        d["timestamp"] = n.timestamp;
        d["text"] = n.text;
        d["verdict"] = n.verdict;
        out.append(std::move(d));
    }
    return out;
}

/// Store plus the embedder named by its tag, so text queries work from Python.
struct PyStore {
    dk::PrecedentStore store;
    std::shared_ptr<const dk::Embedder> embedder;

    explicit PyStore(dk::PrecedentStore s)
        : store(std::move(s)), embedder(dk::make_embedder(store.embedder_tag())) {}
};

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Native core of the disputekit package";

    auto base = py::register_exception<dk::Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<dk::ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<dk::LabelSpaceError>(m, "LabelSpaceError", base.ptr());
    py::register_exception<dk::RewardError>(m, "RewardError", base.ptr());
    py::register_exception<dk::EvalError>(m, "EvalError", base.ptr());
    py::register_exception<dk::RoutingError>(m, "RoutingError", base.ptr());
    py::register_exception<dk::RetrievalError>(m, "RetrievalError", base.ptr());

    py::class_<dk::OrdinalLabelSpace>(m, "LabelSpace")
        .def(py::init<std::vector<std::string>>(), py::arg("labels"))
        .def_property_readonly("labels", &dk::OrdinalLabelSpace::labels)
        .def("parse", &dk::OrdinalLabelSpace::parse, py::arg("text"))
        .def("rank", &dk::OrdinalLabelSpace::rank, py::arg("label"))
        .def("__len__", &dk::OrdinalLabelSpace::size)
        .def("__contains__", &dk::OrdinalLabelSpace::contains);

    m.def(
        "ordinal_reward",
        [](const std::string& pred, const std::string& gt, const dk::OrdinalLabelSpace& space, double beta,
           bool ordinal) { return dk::ordinal_reward(pred, gt, space, reward_config(0.8, 0.2, beta, ordinal)); },
        py::arg("prediction"), py::arg("ground_truth"), py::arg("space"), py::arg("beta") = 0.5,
        py::arg("ordinal") = true);
    m.def("format_reward", &dk::format_reward, py::arg("output"));
    m.def("extract_result", &dk::extract_result, py::arg("output"));
    m.def(
        "total_reward",
        [](double r_ans, int r_fmt, double lambda_ans, double lambda_fmt) {
            return dk::total_reward(r_ans, r_fmt, reward_config(lambda_ans, lambda_fmt, 0.5, true));
        },
        py::arg("answer_reward"), py::arg("format_reward"), py::arg("lambda_ans") = 0.8,
        py::arg("lambda_fmt") = 0.2);
    m.def(
        "consistency_score",
        [](const std::vector<std::string>& verdicts, const std::string& gt, const dk::OrdinalLabelSpace& space) {
            return dk::consistency_score(verdicts, gt, space);
        },
        py::arg("verdicts"), py::arg("ground_truth"), py::arg("space"));
    m.def(
        "divergence_filter",
        [](const std::vector<std::pair<std::string, double>>& scored, double lo, double hi) {
            std::vector<dk::ScoredSample> samples;
            samples.reserve(scored.size());
            for (const auto& [id, s] : scored) {
                samples.push_back({id, s});
            }
            return dk::divergence_filter(samples, lo, hi);
        },
        py::arg("scored"), py::arg("lo") = 0.2, py::arg("hi") = 0.8);

    m.def(
        "evaluate_json",
        [](const std::vector<std::string>& preds, const std::vector<std::string>& gts,
           const dk::OrdinalLabelSpace& space, const std::map<std::string, std::string>& grouping) {
            return dk::to_json(dk::evaluate(preds, gts, space, grouping)).dump();
        },
        py::arg("predictions"), py::arg("ground_truths"), py::arg("space"), py::arg("grouping"));

    m.def(
        "effective_config_json",
        [](const std::string& text, const std::string& base_dir) {
            const auto j = json::parse(text, nullptr, true, true);
            return dk::to_json(dk::config_from_json(j, base_dir)).dump();
        },
        py::arg("config_json"), py::arg("base_dir") = "");
    m.def(
        "run_benchmark_json",
        [](const std::string& text, const std::string& base_dir, const std::string& out_dir) {
            const auto cfg = dk::config_from_json(json::parse(text, nullptr, true, true), base_dir);
            py::gil_scoped_release release;
            return dk::run_benchmark(cfg, out_dir).report.dump();
        },
        py::arg("config_json"), py::arg("base_dir"), py::arg("out_dir"));
    m.def(
        "synthesize_corpus",
        [](const std::string& text, const std::string& base_dir, std::size_t n, const std::string& out_dir) {
            const auto cfg = dk::config_from_json(json::parse(text, nullptr, true, true), base_dir);
            py::gil_scoped_release release;
            return dk::synthesize_corpus(cfg, n, out_dir).records.size();
        },
        py::arg("config_json"), py::arg("base_dir"), py::arg("count"), py::arg("out_dir"));

    py::class_<dk::RoadNetwork>(m, "RoadNetwork")
        .def_property_readonly("node_count", &dk::RoadNetwork::node_count)
        .def_property_readonly("edge_count", &dk::RoadNetwork::edge_count)
        .def("node", [](const dk::RoadNetwork& net, dk::NodeId id) {
            const auto& p = net.node(id);
            return py::make_tuple(p.x, p.y);
        })
        .def("nearest_node",
             [](const dk::RoadNetwork& net, double x, double y) { return net.nearest_node({x, y}); },
             py::arg("x"), py::arg("y"))
        .def(
            "shortest_path",
            [](const dk::RoadNetwork& net, dk::NodeId a, dk::NodeId b) {
                const auto path = dk::shortest_node_path(net, a, b);
                return py::make_tuple(path.nodes, path.length);
            },
            py::arg("a"), py::arg("b"))
        .def(
            "navigate",
            [](const dk::RoadNetwork& net, dk::NodeId a, dk::NodeId b, double spacing) {
                return points_list(dk::navigate(net, a, b, spacing));
            },
            py::arg("a"), py::arg("b"), py::arg("spacing") = 10.0)
        .def("to_json", [](const dk::RoadNetwork& net) { return dk::to_json(net).dump(); });

    m.def(
        "generate_network",
        [](std::uint64_t seed, int width, int height, double jitter, double knockout, double spacing) {
            dk::NetworkParams p;
            p.seed = seed;
            p.width = width;
            p.height = height;
            p.jitter = jitter;
            p.knockout_fraction = knockout;
            p.spacing = spacing;
            return dk::generate_network(p);
        },
        py::arg("seed") = 1, py::arg("width") = 10, py::arg("height") = 10, py::arg("jitter") = 0.0,
        py::arg("knockout") = 0.0, py::arg("spacing") = 100.0);

    py::class_<PyStore>(m, "PrecedentStore")
        .def(py::init([](const std::string& embedder) {
                 const auto e = dk::make_embedder(embedder);
                 return PyStore(dk::PrecedentStore(e->dimension(), e->name()));
             }),
             py::arg("embedder") = "hashing-256")
        .def_static("load", [](const std::string& path) { return PyStore(dk::PrecedentStore::load(path)); })
        .def("save", [](const PyStore& s, const std::string& path) { s.store.save(path); })
        .def("__len__", [](const PyStore& s) { return s.store.size(); })
        .def_property_readonly("embedder", [](const PyStore& s) { return s.store.embedder_tag(); })
        .def(
            "insert",
            [](PyStore& s, const std::string& text, const std::string& verdict, std::int64_t timestamp) {
                return s.store.insert(text, verdict, timestamp, *s.embedder);
            },
            py::arg("text"), py::arg("verdict"), py::arg("timestamp"))
        .def(
            "retrieve",
            [](const PyStore& s, const std::string& query, std::int64_t at, std::size_t k) {
                return neighbor_list(s.store.retrieve_topk(query, at, k, *s.embedder));
            },
            py::arg("query"), py::arg("at"), py::arg("k") = 5);
}
