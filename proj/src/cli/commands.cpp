#include "cli/commands.hpp"

#include "cli/config.hpp"
#include "cli/report.hpp"
#include "cli/sha256.hpp"
#include "pcfeat/eval.hpp"
#include "pcfeat/io.hpp"
#include "pcfeat/synthetic.hpp"
#include "pcfeat/voxel_grid.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

namespace pcfeat::cli {
namespace {

/// Raw flag storage for one subcommand; presence is queried through CLI11
/// so that file values only lose to flags the user actually passed.
struct ParamFlags {
  std::string config_path;
  std::string report_path;
  long long k = 0;
  double lambda = 0;
  long long big_k = 0;
  double radius = 0;
  double rho = 0;
  double epsilon = 0;
  double theta1 = 0;
  double theta2 = 0;
  double merge_radius = 0;
  double delta = 0;
  long long bins = 0;
  double gamma = 0;
  double tau = 0;
  double leaf = 0;
};

void add_param_flags(CLI::App* sub, ParamFlags& pf) {
  sub->add_option("--config", pf.config_path, "parameter file, `key = value` lines");
  sub->add_option("--report", pf.report_path, "write the JSON report here instead of stdout");
  sub->add_option("--k", pf.k, "edge neighborhood size");
  sub->add_option("--lambda", pf.lambda, "edge shift threshold multiplier");
  sub->add_option("--K", pf.big_k, "corner neighborhood size");
  sub->add_option("--R", pf.radius, "curvature support radius, 0 = automatic");
  sub->add_option("--rho", pf.rho, "cluster-count extent threshold");
  sub->add_option("--epsilon", pf.epsilon, "cluster balance slack");
  sub->add_option("--theta1", pf.theta1, "lower cluster angle bound, degrees");
  sub->add_option("--theta2", pf.theta2, "upper cluster angle bound, degrees");
  sub->add_option("--merge-radius", pf.merge_radius, "corner merge radius, 0 = automatic");
  sub->add_option("--delta", pf.delta, "seam support distance, 0 = automatic");
  sub->add_option("--bins", pf.bins, "seam coverage bins");
  sub->add_option("--gamma", pf.gamma, "seam coverage threshold in (0,1]");
  sub->add_option("--tau", pf.tau, "evaluation match radius, 0 = automatic");
  sub->add_option("--leaf", pf.leaf, "voxel leaf size, 0 = no downsampling");
}

Config resolve_config(const CLI::App* sub, const ParamFlags& pf) {
  Config cfg;
  if (sub->count("--config") > 0) {
    apply_config_file(cfg, pf.config_path);
  }
  if (sub->count("--k") > 0) {
    cfg.edge.k = static_cast<Index>(pf.k);
  }
  if (sub->count("--lambda") > 0) {
    cfg.edge.lambda = pf.lambda;
  }
  if (sub->count("--K") > 0) {
    cfg.corner.K = static_cast<Index>(pf.big_k);
  }
  if (sub->count("--R") > 0) {
    cfg.corner.R = pf.radius;
  }
  if (sub->count("--rho") > 0) {
    cfg.corner.rho = pf.rho;
  }
  if (sub->count("--epsilon") > 0) {
    cfg.corner.epsilon = pf.epsilon;
  }
  if (sub->count("--theta1") > 0) {
    cfg.theta1_deg = pf.theta1;
  }
  if (sub->count("--theta2") > 0) {
    cfg.theta2_deg = pf.theta2;
  }
  if (sub->count("--merge-radius") > 0) {
    cfg.corner.merge_radius = pf.merge_radius;
  }
  if (sub->count("--delta") > 0) {
    cfg.seam.delta = pf.delta;
  }
  if (sub->count("--bins") > 0) {
    cfg.seam.bins = static_cast<Index>(pf.bins);
  }
  if (sub->count("--gamma") > 0) {
    cfg.seam.gamma = pf.gamma;
  }
  if (sub->count("--tau") > 0) {
    cfg.eval_tau = pf.tau;
  }
  if (sub->count("--leaf") > 0) {
    cfg.voxel_leaf = pf.leaf;
  }
  validate_config(cfg);
  return cfg;
}

struct LoadedInput {
  PointCloud<double> cloud;  // after optional downsampling
  std::string sha;
  long long raw_points = 0;
};

LoadedInput load_input(const std::string& path, const Config& cfg,
                       StageLog& log) {
  StopWatch w;
  LoadedInput in;
  in.cloud = load_cloud<double>(path, format_from_path(path));
  in.sha = sha256_file(path);
  in.raw_points = in.cloud.size();
  log.add("load", 0, in.raw_points, w.ms());
  if (cfg.voxel_leaf > 0) {
    StopWatch wv;
    const long long before = in.cloud.size();
    in.cloud = voxel_downsample(in.cloud, VoxelSpec<double>{cfg.voxel_leaf});
    log.add("voxel", before, in.cloud.size(), wv.ms());
  }
  return in;
}

EdgeLabeling<double> run_edge_stage(const PointCloud<double>& cloud,
                                    const KdTree<double>& index,
                                    const Config& cfg, StageLog& log) {
  StopWatch w;
  EdgeLabeling<double> edges = detect_edges(cloud, index, cfg.edge);
  log.add("edges", cloud.size(), edges.edge_count(), w.ms());
  return edges;
}

CornerResult<double> run_corner_stage(const PointCloud<double>& cloud,
                                      const EdgeLabeling<double>& edges,
                                      const Config& cfg, StageLog& log) {
  StopWatch w;
  CornerResult<double> corners = detect_corners(cloud, edges, cfg.corner_params());
  log.add("corners", edges.edge_count(),
          static_cast<long long>(corners.corners.size()), w.ms());
  return corners;
}

PointMatrix<double> edge_point_matrix(const PointCloud<double>& cloud,
                                      const EdgeLabeling<double>& edges) {
  const std::vector<Index> idx = edges.edge_indices();
  PointMatrix<double> pts(static_cast<Index>(idx.size()), 3);
  for (Index i = 0; i < pts.rows(); ++i) {
    pts.row(i) = cloud.points.row(idx[static_cast<std::size_t>(i)]);
  }
  return pts;
}

SeamExtraction<double> run_seam_stage(const PointCloud<double>& cloud,
                                      const EdgeLabeling<double>& edges,
                                      const CornerResult<double>& corners,
                                      const Config& cfg, StageLog& log) {
  StopWatch w;
  const PointMatrix<double> epts = edge_point_matrix(cloud, edges);
  SeamExtraction<double> seams =
      extract_seams(corners.corner_positions(), epts, cfg.seam);
  log.add("seams", static_cast<long long>(corners.corners.size()),
          static_cast<long long>(seams.segments.size()), w.ms());
  return seams;
}

std::vector<PointLabel> class_labels(const PointCloud<double>& cloud,
                                     const EdgeLabeling<double>& edges,
                                     const CornerResult<double>* corners) {
  std::vector<PointLabel> labels(static_cast<std::size_t>(cloud.size()),
                                 PointLabel::plain);
  for (Index i = 0; i < cloud.size(); ++i) {
    if (edges.is_edge[i]) {
      labels[static_cast<std::size_t>(i)] = PointLabel::edge;
    }
  }
  if (corners != nullptr) {
    for (const Index edge_row : corners->candidate_edge_rows) {
      const Index cloud_row =
          corners->edge_rows[static_cast<std::size_t>(edge_row)];
      labels[static_cast<std::size_t>(cloud_row)] = PointLabel::corner;
    }
  }
  return labels;
}

void write_labeled(const PointCloud<double>& cloud,
                   const std::vector<PointLabel>& labels,
                   const std::string& path, StageLog& log) {
  StopWatch w;
  save_labeled_cloud(cloud, labels, path);
  log.add("write", cloud.size(), cloud.size(), w.ms());
}

Json corners_json(const CornerResult<double>& corners) {
  Json arr = Json::array();
  for (const MergedCorner<double>& c : corners.corners) {
    arr.push_back(Json::array({c.position[0], c.position[1], c.position[2]}));
  }
  return arr;
}

Json seams_json(const SeamExtraction<double>& seams) {
  Json arr = Json::array();
  for (const SeamSegment<double>& s : seams.segments) {
    arr.push_back(Json{{"a", s.a}, {"b", s.b}, {"coverage", s.coverage}});
  }
  return arr;
}

Json pr_json(const PRReport<double>& pr) {
  return Json{{"tp", pr.tp},
              {"fp", pr.fp},
              {"fn", pr.fn},
              {"precision", pr.precision},
              {"recall", pr.recall}};
}

/// Shared core of edges/corners/seams/pipeline: runs the pipeline up to
/// `depth` (1 edges, 2 corners, 3 seams), optionally writes the labeled
/// cloud, and emits the report.
void run_pipeline_command(const std::string& command, int depth,
                          const std::string& input_path,
                          const std::string& output_path, const Config& cfg,
                          const std::string& report_path) {
  StageLog log;
  const LoadedInput in = load_input(input_path, cfg, log);
  const KdTree<double> index = build_index(in.cloud);
  const EdgeLabeling<double> edges = run_edge_stage(in.cloud, index, cfg, log);

  Json results;
  results["edges"] = edges.edge_count();
  Json resolved;

  CornerResult<double> corners;
  if (depth >= 2) {
    corners = run_corner_stage(in.cloud, edges, cfg, log);
    results["corners"] = corners_json(corners);
    resolved["R"] = corners.resolved_R;
    resolved["merge_radius"] = corners.resolved_merge_radius;
  }
  if (depth >= 3) {
    const SeamExtraction<double> seams =
        run_seam_stage(in.cloud, edges, corners, cfg, log);
    results["seams"] = seams_json(seams);
    resolved["delta"] = seams.resolved_delta;
  }
  if (!resolved.empty()) {
    results["resolved"] = resolved;
  }

  if (!output_path.empty()) {
    const std::vector<PointLabel> labels =
        class_labels(in.cloud, edges, depth >= 2 ? &corners : nullptr);
    write_labeled(in.cloud, labels, output_path, log);
  }
  emit_report(make_report(command, cfg, input_path, in.sha, in.raw_points, log,
                          results),
              report_path);
}

GroundTruth<double> load_truth(const std::string& path, StageLog& log) {
  StopWatch w;
  const LabeledCloud<double> lc = load_labeled_xyz<double>(path);
  GroundTruth<double> truth =
      truth_from_labels(lc.cloud.points, lc.labels, TruthSource::file);
  log.add("truth", 0, lc.cloud.size(), w.ms());
  return truth;
}

void run_eval_command(const std::string& input_path,
                      const std::string& truth_path, const std::string& what,
                      const Config& cfg, const std::string& report_path) {
  StageLog log;
  const LoadedInput in = load_input(input_path, cfg, log);
  const GroundTruth<double> truth = load_truth(truth_path, log);
  const KdTree<double> index = build_index(in.cloud);
  const double tau =
      cfg.eval_tau > 0 ? cfg.eval_tau : 1.5 * mean_nn_spacing(index);

  const EdgeLabeling<double> edges = run_edge_stage(in.cloud, index, cfg, log);
  PointMatrix<double> detected;
  const PointMatrix<double>* truth_set = nullptr;
  if (what == "edges") {
    detected = edge_point_matrix(in.cloud, edges);
    truth_set = &truth.edge_points;
  } else {
    const CornerResult<double> corners =
        run_corner_stage(in.cloud, edges, cfg, log);
    detected.resize(static_cast<Index>(corners.corners.size()), 3);
    for (Index i = 0; i < detected.rows(); ++i) {
      detected.row(i) =
          corners.corners[static_cast<std::size_t>(i)].position.transpose();
    }
    truth_set = &truth.corner_points;
  }

  StopWatch w;
  const PRReport<double> pr = match_and_score(detected, *truth_set, tau);
  log.add("eval", detected.rows(), pr.tp, w.ms());

  Json results;
  results["pr"] = pr_json(pr);
  results["resolved"] = Json{{"tau", tau}};
  emit_report(make_report("eval", cfg, input_path, in.sha, in.raw_points, log,
                          results),
              report_path);
}

SweepDetector detector_from_name(const std::string& name) {
  if (name == "ms-edge") {
    return SweepDetector::ms_edge;
  }
  if (name == "ev-edge") {
    return SweepDetector::ev_edge;
  }
  return SweepDetector::corner;
}

void write_sweep_csv(const std::vector<PRReport<double>>& rows,
                     const std::string& path) {
  std::string text = "param,value,tp,fp,fn,precision,recall,millis\n";
  char buf[256];
  for (const PRReport<double>& r : rows) {
    std::snprintf(buf, sizeof(buf), "%s,%.10g,%lld,%lld,%lld,%.10g,%.10g,%.3f\n",
                  r.param_name.c_str(), r.param_value,
                  static_cast<long long>(r.tp), static_cast<long long>(r.fp),
                  static_cast<long long>(r.fn), r.precision, r.recall, r.millis);
    text += buf;
  }
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (f == nullptr) {
    throw IoError("cannot open " + path + " for writing");
  }
  const bool ok = std::fwrite(text.data(), 1, text.size(), f) == text.size();
  if (std::fclose(f) != 0 || !ok) {
    throw IoError("write failure on " + path);
  }
}

void run_sweep_command(const std::string& input_path,
                       const std::string& truth_path,
                       const std::string& detector_name,
                       const std::string& parameter,
                       const std::vector<double>& values, const Config& cfg,
                       const std::string& csv_path,
                       const std::string& report_path) {
  StageLog log;
  const LoadedInput in = load_input(input_path, cfg, log);
  const GroundTruth<double> truth = load_truth(truth_path, log);

  SweepSpec<double> spec;
  spec.detector = detector_from_name(detector_name);
  spec.parameter = parameter;
  spec.values = values;
  spec.edge = cfg.edge;
  spec.corner = cfg.corner_params();
  spec.ev_k = cfg.edge.k;
  spec.tau = cfg.eval_tau;

  StopWatch w;
  const std::vector<PRReport<double>> rows = sweep(in.cloud, truth, spec);
  log.add("sweep", in.cloud.size(), static_cast<long long>(rows.size()), w.ms());
  write_sweep_csv(rows, csv_path);

  Json table = Json::array();
  for (const PRReport<double>& r : rows) {
    Json row = pr_json(r);
    row["param"] = r.param_name;
    row["value"] = r.param_value;
    row["millis"] = r.millis;
    table.push_back(row);
  }
  Json results;
  results["sweep"] = table;
  emit_report(make_report("sweep", cfg, input_path, in.sha, in.raw_points, log,
                          results),
              report_path);
}

ShapeKind kind_from_name(const std::string& name) {
  if (name == "plane") {
    return ShapeKind::plane;
  }
  if (name == "cube") {
    return ShapeKind::cube;
  }
  if (name == "lbracket") {
    return ShapeKind::lbracket;
  }
  return ShapeKind::panel;
}

void run_synth_command(const std::string& cloud_path,
                       const std::string& labels_path,
                       const ShapeSpec<double>& spec, const Config& cfg,
                       const std::string& report_path) {
  StageLog log;
  StopWatch w;
  const SyntheticShape<double> shape = synth_shape(spec);
  const long long n = shape.cloud.size();
  log.add("synth", 0, n, w.ms());

  StopWatch ww;
  save_labeled_cloud(shape.cloud, shape.labels, cloud_path);
  save_labeled_xyz(shape.cloud, shape.labels, labels_path);
  log.add("write", n, n, ww.ms());

  long long edge_labels = 0;
  long long corner_labels = 0;
  for (const PointLabel l : shape.labels) {
    edge_labels += l == PointLabel::edge ? 1 : 0;
    corner_labels += l == PointLabel::corner ? 1 : 0;
  }
  Json results;
  results["points"] = n;
  results["edge_labels"] = edge_labels;
  results["corner_labels"] = corner_labels;
  emit_report(make_report("synth", cfg, cloud_path, sha256_file(cloud_path), n,
                          log, results),
              report_path);
}

}  // namespace

int run_command(int argc, const char* const* argv) {
  CLI::App app{"edge, corner and weld-seam detection for unorganized point clouds"};
  app.require_subcommand(1);

  struct SubArgs {
    std::string input;
    std::string output;
    ParamFlags pf;
  };

  SubArgs edges_args;
  CLI::App* edges_cmd = app.add_subcommand("edges", "label edge points, write PLY + report");
  edges_cmd->add_option("input", edges_args.input, "input cloud (.ply/.xyz)")->required();
  edges_cmd->add_option("output", edges_args.output, "labeled PLY to write")->required();
  add_param_flags(edges_cmd, edges_args.pf);

  SubArgs corners_args;
  CLI::App* corners_cmd = app.add_subcommand("corners", "edge then corner detection");
  corners_cmd->add_option("input", corners_args.input, "input cloud (.ply/.xyz)")->required();
  corners_cmd->add_option("output", corners_args.output, "labeled PLY to write")->required();
  add_param_flags(corners_cmd, corners_args.pf);

  SubArgs seams_args;
  CLI::App* seams_cmd = app.add_subcommand("seams", "full pipeline to seam report");
  seams_cmd->add_option("input", seams_args.input, "input cloud (.ply/.xyz)")->required();
  seams_cmd->add_option("output", seams_args.output, "labeled PLY to write (optional)");
  add_param_flags(seams_cmd, seams_args.pf);

  SubArgs pipeline_args;
  CLI::App* pipeline_cmd = app.add_subcommand("pipeline", "edges, corners and seams in one run");
  pipeline_cmd->add_option("input", pipeline_args.input, "input cloud (.ply/.xyz)")->required();
  pipeline_cmd->add_option("output", pipeline_args.output, "labeled PLY to write")->required();
  add_param_flags(pipeline_cmd, pipeline_args.pf);

  SubArgs eval_args;
  std::string eval_truth;
  std::string eval_what = "edges";
  CLI::App* eval_cmd = app.add_subcommand("eval", "score detections against a label file");
  eval_cmd->add_option("input", eval_args.input, "input cloud (.ply/.xyz)")->required();
  eval_cmd->add_option("--truth", eval_truth, "label file, xyz + class column")->required();
  eval_cmd->add_option("--what", eval_what, "edges or corners")
      ->check(CLI::IsMember({"edges", "corners"}));
  add_param_flags(eval_cmd, eval_args.pf);

  SubArgs sweep_args;
  std::string sweep_truth;
  std::string sweep_detector;
  std::string sweep_param;
  std::vector<double> sweep_values;
  std::string sweep_csv;
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "precision/recall table over one parameter");
  sweep_cmd->add_option("input", sweep_args.input, "input cloud (.ply/.xyz)")->required();
  sweep_cmd->add_option("--truth", sweep_truth, "label file, xyz + class column")->required();
  sweep_cmd->add_option("--detector", sweep_detector, "ms-edge, ev-edge or corner")
      ->check(CLI::IsMember({"ms-edge", "ev-edge", "corner"}))
      ->required();
  sweep_cmd->add_option("--param", sweep_param, "parameter to vary")->required();
  sweep_cmd->add_option("--values", sweep_values, "comma separated values")
      ->delimiter(',')
      ->required();
  sweep_cmd->add_option("--csv", sweep_csv, "CSV output path (stdout if absent)");
  add_param_flags(sweep_cmd, sweep_args.pf);

  SubArgs synth_args;
  std::string synth_kind;
  ShapeSpec<double> shape_spec;
  CLI::App* synth_cmd = app.add_subcommand("synth", "generate a labeled synthetic cloud");
  synth_cmd->add_option("cloud", synth_args.input, "PLY to write")->required();
  synth_cmd->add_option("labels", synth_args.output, "label file to write")->required();
  synth_cmd->add_option("--kind", synth_kind, "plane, cube, lbracket or panel")
      ->check(CLI::IsMember({"plane", "cube", "lbracket", "panel"}))
      ->required();
  synth_cmd->add_option("--size", shape_spec.size, "shape extent, meters");
  synth_cmd->add_option("--spacing", shape_spec.spacing, "lattice spacing, meters");
  synth_cmd->add_option("--noise", shape_spec.noise_sigma, "Gaussian sigma, meters");
  synth_cmd->add_option("--seed", shape_spec.seed, "noise seed");
  add_param_flags(synth_cmd, synth_args.pf);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (edges_cmd->parsed()) {
      const Config cfg = resolve_config(edges_cmd, edges_args.pf);
      run_pipeline_command("edges", 1, edges_args.input, edges_args.output, cfg,
                           edges_args.pf.report_path);
    } else if (corners_cmd->parsed()) {
      const Config cfg = resolve_config(corners_cmd, corners_args.pf);
      run_pipeline_command("corners", 2, corners_args.input, corners_args.output,
                           cfg, corners_args.pf.report_path);
    } else if (seams_cmd->parsed()) {
      const Config cfg = resolve_config(seams_cmd, seams_args.pf);
      run_pipeline_command("seams", 3, seams_args.input, seams_args.output, cfg,
                           seams_args.pf.report_path);
    } else if (pipeline_cmd->parsed()) {
      const Config cfg = resolve_config(pipeline_cmd, pipeline_args.pf);
      run_pipeline_command("pipeline", 3, pipeline_args.input,
                           pipeline_args.output, cfg,
                           pipeline_args.pf.report_path);
    } else if (eval_cmd->parsed()) {
      const Config cfg = resolve_config(eval_cmd, eval_args.pf);
      run_eval_command(eval_args.input, eval_truth, eval_what, cfg,
                       eval_args.pf.report_path);
    } else if (sweep_cmd->parsed()) {
      const Config cfg = resolve_config(sweep_cmd, sweep_args.pf);
      run_sweep_command(sweep_args.input, sweep_truth, sweep_detector,
                        sweep_param, sweep_values, cfg, sweep_csv,
                        sweep_args.pf.report_path);
    } else if (synth_cmd->parsed()) {
      const Config cfg = resolve_config(synth_cmd, synth_args.pf);
      shape_spec.kind = kind_from_name(synth_kind);
      run_synth_command(synth_args.input, synth_args.output, shape_spec, cfg,
                        synth_args.pf.report_path);
    }
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ComputeError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}

}  // namespace pcfeat::cli
