#pragma once

#include <CLI11.hpp>

#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "sk/archive.hpp"
#include "sk/bench.hpp"
#include "sk/continuous.hpp"
#include "sk/datasets.hpp"
#include "sk/dense.hpp"
#include "sk/selection.hpp"
#include "sk/sparse.hpp"
#include "sk/table.hpp"
#include "sk/train.hpp"
#include "sk/transport.hpp"

namespace sk {

namespace cli_detail {

inline Metric parse_metric(const std::string& s) {
  if (s == "l2" || s == "euclidean") return Metric::euclidean;
  if (s == "l1" || s == "manhattan") return Metric::manhattan;
  throw InputError("unknown metric '" + s + "' (expected l2 or l1)");
}

inline Activation parse_activation(const std::string& s) {
  if (s == "exp" || s == "exponential") return Activation::exponential;
  if (s == "gauss" || s == "gaussian") return Activation::gaussian;
  throw InputError("unknown kernel '" + s + "' (expected exp or gauss)");
}

struct DataOptions {
  std::string input;
  std::string label_column;
  std::vector<std::string> target_columns;
  char delimiter = ',';
};

struct LoadedData {
  PointSet features;
  PointSet targets;       // one-hot when labels present
  IndexVector labels;     // empty unless label column given
  int classes = 0;
  bool onehot = false;
};

inline LoadedData load_training_data(const DataOptions& opt) {
  const Table table = load_table(opt.input, {opt.delimiter, true});
  LoadedData d;
  if (!opt.label_column.empty()) {
    const long col = table.column_index(opt.label_column);
    if (col < 0) throw InputError("label column '" + opt.label_column + "' not found in " + opt.input);
    d.labels = integer_column(table, col);
    if (d.labels.size() == 0) throw InputError("no rows in " + opt.input);
    if (d.labels.minCoeff() < 0) throw InputError("labels must be non-negative");
    d.classes = d.labels.maxCoeff() + 1;
    d.features = drop_column(table, col);
    d.targets = one_hot(d.labels, d.classes);
    d.onehot = true;
  } else if (!opt.target_columns.empty()) {
    std::vector<long> cols;
    for (const auto& name : opt.target_columns) {
      const long c = table.column_index(name);
      if (c < 0) throw InputError("target column '" + name + "' not found in " + opt.input);
      cols.push_back(c);
    }
    d.targets.resize(table.values.rows(), long(cols.size()));
    for (size_t j = 0; j < cols.size(); ++j) d.targets.col(long(j)) = table.values.col(cols[j]);
    d.features.resize(table.values.rows(), table.values.cols() - long(cols.size()));
    long k = 0;
    for (long j = 0; j < table.values.cols(); ++j) {
      if (std::find(cols.begin(), cols.end(), j) != cols.end()) continue;
      d.features.col(k++) = table.values.col(j);
    }
  } else {
    throw InputError("one of --label-col or --target-col is required");
  }
  if (d.features.cols() < 1) throw InputError("no feature columns left in " + opt.input);
  return d;
}

inline Table prediction_table(const PointSet& pred, const ArchiveMeta& meta) {
  Table out;
  const bool with_label = meta.onehot_labels && pred.cols() > 1;
  out.values.resize(pred.rows(), pred.cols() + (with_label ? 1 : 0));
  for (Eigen::Index j = 0; j < pred.cols(); ++j) {
    out.columns.push_back("pred_" + std::to_string(j));
    out.values.col(j) = pred.col(j);
  }
  if (with_label) {
    out.columns.push_back("label");
    for (Eigen::Index i = 0; i < pred.rows(); ++i) {
      Eigen::Index best = 0;
      pred.row(i).maxCoeff(&best);
      out.values(i, pred.cols()) = double(best);
    }
  }
  return out;
}

inline void append_column(Table& table, const std::string& name, const Vector& v) {
  PointSet grown(table.values.rows(), table.values.cols() + 1);
  grown.leftCols(table.values.cols()) = table.values;
  grown.col(table.values.cols()) = v;
  table.values = std::move(grown);
  table.columns.push_back(name);
}

}  // namespace cli_detail

/// Command-line entry point; returns the process exit code (0 success,
/// 1 runtime failure, 2 usage error).
inline int run_cli(std::vector<std::string> args) {
  CLI::App app{"sparse and dense kernel ridge regression toolkit"};
  app.require_subcommand(1);

  // ---- fit ----------------------------------------------------------------
  auto* fit = app.add_subcommand("fit", "fit a model on a CSV table and write an archive");
  cli_detail::DataOptions fit_data;
  std::string fit_kernel = "exp", fit_metric = "l2", fit_kind = "dense", fit_out;
  double fit_lambda = 1e-9;
  bool fit_no_normalize = false;
  int fit_bandwidth = 100, fit_blend = 4, fit_coarse = 0;
  fit->add_option("--input", fit_data.input, "training CSV")->required();
  fit->add_option("--label-col", fit_data.label_column, "integer class label column");
  fit->add_option("--target-col", fit_data.target_columns, "regression target column(s)");
  fit->add_option("--delimiter", fit_data.delimiter, "CSV delimiter");
  fit->add_option("--kernel", fit_kernel, "activation: exp|gauss");
  fit->add_option("--metric", fit_metric, "distance: l2|l1");
  fit->add_option("--lambda", fit_lambda, "Tikhonov regularization");
  fit->add_flag("--no-normalize", fit_no_normalize, "skip feature normalization");
  fit->add_option("--kind", fit_kind, "dense|sparse|blended|hierarchical");
  fit->add_option("--bandwidth", fit_bandwidth, "M for sparse/blended/hierarchical kinds");
  fit->add_option("--blend", fit_blend, "anchors J for the blended kind");
  fit->add_option("--coarse", fit_coarse, "coarse size N0 for the hierarchical kind");
  fit->add_option("--out", fit_out, "output archive path")->required();

  // ---- predict / error-map -------------------------------------------------
  auto* predict = app.add_subcommand("predict", "predict on a CSV table with a model archive");
  std::string pr_model, pr_input, pr_out, pr_continuous, pr_label;
  char pr_delim = ',';
  bool pr_sparse = false, pr_with_error = false;
  int pr_bandwidth = 100, pr_blend = 4, pr_coarse = 0, pr_threads = 0;
  predict->add_option("--model", pr_model, "model archive")->required();
  predict->add_option("--input", pr_input, "query CSV")->required();
  predict->add_option("--out", pr_out, "output CSV")->required();
  predict->add_option("--label-col", pr_label, "column to drop from the query features");
  predict->add_option("--delimiter", pr_delim, "CSV delimiter");
  predict->add_flag("--sparse", pr_sparse, "lazy sparse prediction from the archived data");
  predict->add_option("--bandwidth", pr_bandwidth, "M for --sparse");
  predict->add_option("--continuous", pr_continuous, "blended|hierarchical variant");
  predict->add_option("--blend", pr_blend, "anchors J for --continuous blended");
  predict->add_option("--coarse", pr_coarse, "coarse size N0 for --continuous hierarchical");
  predict->add_option("--threads", pr_threads,
                      "parallel batch width (default: SK_THREADS or 1)");
  predict->add_flag("--with-error", pr_with_error, "append the error indicator column");

  auto* errmap = app.add_subcommand("error-map", "write the error indicator for query points");
  std::string em_model, em_input, em_out;
  bool em_sparse = false;
  int em_bandwidth = 100;
  std::string em_label;
  errmap->add_option("--model", em_model, "model archive")->required();
  errmap->add_option("--input", em_input, "query CSV")->required();
  errmap->add_option("--out", em_out, "output CSV")->required();
  errmap->add_option("--label-col", em_label, "column to drop from the query features");
  errmap->add_flag("--sparse", em_sparse, "local indicator from the archived data");
  errmap->add_option("--bandwidth", em_bandwidth, "M for --sparse");

  // ---- select ---------------------------------------------------------------
  auto* select = app.add_subcommand("select", "greedy farthest-point subset selection");
  std::string sel_input, sel_out, sel_metric = "l2", sel_label;
  int sel_count = 0, sel_start = 0;
  select->add_option("--input", sel_input, "CSV of points")->required();
  select->add_option("--count", sel_count, "number of points to select")->required();
  select->add_option("--start", sel_start, "index of the first selected point");
  select->add_option("--metric", sel_metric, "distance: l2|l1");
  select->add_option("--label-col", sel_label, "column to exclude from the features");
  select->add_option("--out", sel_out, "output CSV (one index column)")->required();

  // ---- ot-loss ----------------------------------------------------------------
  auto* ot = app.add_subcommand("ot-loss", "optimal-transport losses between two point sets");
  std::string ot_x, ot_y, ot_kind = "monge", ot_cost = "sqeuclidean", ot_out;
  ot->add_option("--x", ot_x, "first CSV")->required();
  ot->add_option("--y", ot_y, "second CSV")->required();
  ot->add_option("--kind", ot_kind, "monge|gm");
  ot->add_option("--cost", ot_cost, "sqeuclidean|euclidean (monge only)");
  ot->add_option("--out", ot_out, "optional output CSV");

  // ---- train ----------------------------------------------------------------
  auto* train = app.add_subcommand("train", "gradient training of the kernel readout");
  cli_detail::DataOptions tr_data;
  std::string tr_loss = "ce", tr_kernel = "exp", tr_metric = "l2", tr_out, tr_curve;
  double tr_lr = 1e-3, tr_lambda = 1e-9, tr_gm = 0.0, tr_wd = 0.0;
  int tr_epochs = 10, tr_batch = 64, tr_centers = 0;
  std::uint64_t tr_seed = 0;
  bool tr_learn_targets = false, tr_learn_centers = false, tr_no_normalize = false;
  train->add_option("--input", tr_data.input, "training CSV")->required();
  train->add_option("--label-col", tr_data.label_column, "integer class label column")->required();
  train->add_option("--delimiter", tr_data.delimiter, "CSV delimiter");
  train->add_option("--loss", tr_loss, "ce|mse");
  train->add_option("--kernel", tr_kernel, "activation: exp|gauss");
  train->add_option("--metric", tr_metric, "distance: l2|l1");
  train->add_flag("--no-normalize", tr_no_normalize, "skip feature normalization");
  train->add_option("--lr", tr_lr, "learning rate");
  train->add_option("--epochs", tr_epochs, "training epochs");
  train->add_option("--batch", tr_batch, "minibatch size");
  train->add_option("--weight-decay", tr_wd, "AdamW decoupled weight decay");
  train->add_option("--lambda", tr_lambda, "Tikhonov regularization");
  train->add_flag("--learn-targets", tr_learn_targets, "make theta_y learnable");
  train->add_flag("--learn-centers", tr_learn_centers, "make theta_x learnable");
  train->add_option("--centers", tr_centers, "greedy-selected center count (0 = all points)");
  train->add_option("--gm-weight", tr_gm, "Gromov-Monge regularizer weight");
  train->add_option("--seed", tr_seed, "shuffling seed");
  train->add_option("--out", tr_out, "output archive path")->required();
  train->add_option("--curve", tr_curve, "loss-curve CSV (epoch, loss)");

  // ---- bench ----------------------------------------------------------------
  auto* bench = app.add_subcommand("bench", "benchmark suites on generated data");
  std::string be_suite = "readout-comparison", be_out;
  std::vector<long> be_sizes{100, 1000};
  int be_bandwidth = 100;
  long be_queries = 1000;
  std::uint64_t be_seed = 0;
  bench->add_option("--suite", be_suite, "readout-comparison|lazy-scaling");
  bench->add_option("--sizes", be_sizes, "training sizes")->delimiter(',');
  bench->add_option("--bandwidth", be_bandwidth, "sparse bandwidth M");
  bench->add_option("--queries", be_queries, "query count for lazy-scaling");
  bench->add_option("--seed", be_seed, "data seed");
  bench->add_option("--out", be_out, "output CSV");

  // ---- gen ------------------------------------------------------------------
  auto* gen = app.add_subcommand("gen", "generate synthetic datasets");
  std::string ge_dataset = "rings", ge_out;
  long ge_n = 1000;
  std::uint64_t ge_seed = 0;
  gen->add_option("--dataset", ge_dataset, "clusters|rings|sine1d");
  gen->add_option("--n", ge_n, "number of rows");
  gen->add_option("--seed", ge_seed, "generator seed");
  gen->add_option("--out", ge_out, "output CSV")->required();

  try {
    std::vector<const char*> argv;
    argv.push_back("skcli");
    for (const auto& a : args) argv.push_back(a.c_str());
    app.parse(int(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*fit) {
      const cli_detail::LoadedData data = cli_detail::load_training_data(fit_data);
      KernelSpec spec;
      spec.metric = cli_detail::parse_metric(fit_metric);
      spec.activation = cli_detail::parse_activation(fit_kernel);
      if (!fit_no_normalize) spec.normalizer = fit_normalizer(data.features);
      ArchiveMeta meta{data.onehot};
      if (fit_kind == "dense") {
        save_model(DenseModel(spec, data.features, data.targets, fit_lambda), fit_out, meta);
      } else if (fit_kind == "sparse") {
        save_model(SparseModel(spec, data.features, data.targets, fit_bandwidth, fit_lambda),
                   fit_out, meta);
      } else if (fit_kind == "blended") {
        save_model(make_blended(
                       SparseModel(spec, data.features, data.targets, fit_bandwidth, fit_lambda),
                       fit_blend),
                   fit_out, meta);
      } else if (fit_kind == "hierarchical") {
        const int coarse = fit_coarse > 0
                               ? fit_coarse
                               : int(std::max<Eigen::Index>(data.features.rows() / 10, 1));
        save_model(fit_hierarchical(spec, data.features, data.targets, fit_bandwidth, coarse,
                                    fit_lambda),
                   fit_out, meta);
      } else {
        throw InputError("unknown model kind '" + fit_kind + "'");
      }
      std::cout << "wrote " << fit_out << "\n";
    } else if (*predict) {
      if (pr_threads <= 0) {
        const char* env = std::getenv("SK_THREADS");
        pr_threads = env ? std::max(std::atoi(env), 1) : 1;
      }
      LoadedModel loaded = load_model(pr_model);
      const Table queries = load_table(pr_input, {pr_delim, true});
      const PointSet z =
          pr_label.empty() ? queries.values : drop_column(queries, queries.column_index(pr_label));
      PointSet pred;
      Vector err;
      auto data_of = [&](const KernelSpec*& spec, const PointSet*& x, const PointSet*& y,
                         double& lambda) {
        if (const auto* d = std::get_if<DenseModel>(&loaded.model)) {
          spec = &d->spec(); x = &d->features(); y = &d->targets(); lambda = d->lambda();
        } else if (const auto* s = std::get_if<SparseModel>(&loaded.model)) {
          spec = &s->spec(); x = &s->features(); y = &s->targets(); lambda = s->lambda();
        } else if (const auto* b = std::get_if<BlendedModel>(&loaded.model)) {
          spec = &b->sparse.spec(); x = &b->sparse.features(); y = &b->sparse.targets();
          lambda = b->sparse.lambda();
        } else {
          throw InputError("--sparse/--continuous need a data-carrying archive");
        }
      };
      if (!pr_continuous.empty()) {
        const KernelSpec* spec; const PointSet* x; const PointSet* y; double lambda = 1e-9;
        data_of(spec, x, y, lambda);
        if (pr_continuous == "blended") {
          const BlendedModel m = make_blended(SparseModel(*spec, *x, *y, pr_bandwidth, lambda),
                                              pr_blend);
          pred = predict_blended(m, z);
        } else if (pr_continuous == "hierarchical") {
          const int coarse =
              pr_coarse > 0 ? pr_coarse : int(std::max<Eigen::Index>(x->rows() / 10, 1));
          const HierModel m = fit_hierarchical(*spec, *x, *y, pr_bandwidth, coarse, lambda);
          pred = predict_hierarchical(m, z);
          if (pr_with_error) err = m.residual.local_error(z);
        } else {
          throw InputError("--continuous must be blended or hierarchical");
        }
      } else if (pr_sparse) {
        // Always rebuilt from the archived data so --bandwidth is honored.
        const KernelSpec* spec; const PointSet* x; const PointSet* y; double lambda = 1e-9;
        data_of(spec, x, y, lambda);
        const SparseModel m(*spec, *x, *y, pr_bandwidth, lambda);
        SparseStats stats;
        pred = m.predict_batch(z, pr_threads, &stats);
        if (pr_with_error) err = m.local_error(z);
      } else if (const auto* s = std::get_if<SparseModel>(&loaded.model)) {
        pred = s->predict_batch(z, pr_threads, nullptr);
        if (pr_with_error) err = s->local_error(z);
      } else {
        pred = predict_any(loaded.model, z);
        if (pr_with_error) {
          if (const auto* d = std::get_if<DenseModel>(&loaded.model)) err = d->power_function(z);
          else if (const auto* b = std::get_if<BlendedModel>(&loaded.model))
            err = b->sparse.local_error(z);
          else throw InputError("--with-error is not available for this model kind");
        }
      }
      Table out = cli_detail::prediction_table(pred, loaded.meta);
      if (pr_with_error && err.size() > 0) cli_detail::append_column(out, "error_indicator", err);
      save_table(pr_out, out, pr_delim);
      std::cout << "wrote " << pr_out << "\n";
    } else if (*errmap) {
      LoadedModel loaded = load_model(em_model);
      const Table queries = load_table(em_input, {',', true});
      const PointSet z =
          em_label.empty() ? queries.values : drop_column(queries, queries.column_index(em_label));
      Vector err;
      if (em_sparse || std::holds_alternative<SparseModel>(loaded.model)) {
        if (const auto* s = std::get_if<SparseModel>(&loaded.model)) {
          err = s->local_error(z);
        } else if (const auto* d = std::get_if<DenseModel>(&loaded.model)) {
          const SparseModel m(d->spec(), d->features(), d->targets(), em_bandwidth, d->lambda());
          err = m.local_error(z);
        } else {
          throw InputError("error-map --sparse needs a dense or sparse archive");
        }
      } else if (const auto* d = std::get_if<DenseModel>(&loaded.model)) {
        err = d->power_function(z);
      } else {
        throw InputError("error-map needs a dense or sparse archive");
      }
      Table out;
      out.columns = {"error_indicator"};
      out.values = err;
      save_table(em_out, out);
      std::cout << "wrote " << em_out << "\n";
    } else if (*select) {
      Table table = load_table(sel_input, {',', true});
      PointSet points = table.values;
      if (!sel_label.empty()) {
        const long col = table.column_index(sel_label);
        if (col < 0) throw InputError("column '" + sel_label + "' not found");
        points = drop_column(table, col);
      }
      const Selection sel =
          greedy_select(points, sel_count, cli_detail::parse_metric(sel_metric), sel_start);
      Table out;
      out.columns = {"index"};
      out.values.resize(long(sel.indices.size()), 1);
      for (size_t i = 0; i < sel.indices.size(); ++i) out.values(long(i), 0) = sel.indices[i];
      save_table(sel_out, out);
      std::cout << "wrote " << sel_out << "\n";
    } else if (*ot) {
      const Table tx = load_table(ot_x, {',', true});
      const Table ty = load_table(ot_y, {',', true});
      Table out;
      if (ot_kind == "monge") {
        const AssignCost cost = ot_cost == "euclidean" ? AssignCost::l2 : AssignCost::squared_l2;
        const Assignment a = monge_assign(tx.values, ty.values, cost);
        std::cout << "monge_cost " << a.cost << "\n";
        out.columns = {"source", "target"};
        out.values.resize(long(a.permutation.size()), 2);
        for (size_t i = 0; i < a.permutation.size(); ++i) {
          out.values(long(i), 0) = double(i);
          out.values(long(i), 1) = a.permutation[i];
        }
      } else if (ot_kind == "gm") {
        const GromovMonge gm = gromov_monge(tx.values, ty.values);
        std::cout << "gromov_monge " << gm.value << "\n";
        out.columns = {"gromov_monge"};
        out.values.resize(1, 1);
        out.values(0, 0) = gm.value;
      } else {
        throw InputError("unknown ot-loss kind '" + ot_kind + "'");
      }
      if (!ot_out.empty()) {
        save_table(ot_out, out);
        std::cout << "wrote " << ot_out << "\n";
      }
    } else if (*train) {
      const cli_detail::LoadedData data = cli_detail::load_training_data(tr_data);
      KernelSpec spec;
      spec.metric = cli_detail::parse_metric(tr_metric);
      spec.activation = cli_detail::parse_activation(tr_kernel);
      if (!tr_no_normalize) spec.normalizer = fit_normalizer(data.features);
      ReadoutConfig config;
      config.learn_targets = tr_learn_targets || !tr_learn_centers;
      config.learn_centers = tr_learn_centers;
      config.epochs = tr_epochs;
      config.batch = tr_batch;
      config.lr = tr_lr;
      config.weight_decay = tr_wd;
      config.lambda = tr_lambda;
      config.gm_weight = tr_gm;
      config.loss = tr_loss == "mse" ? LossKind::mse : LossKind::cross_entropy;
      config.center_count = tr_centers;
      config.seed = tr_seed;
      const ReadoutResult result =
          train_readout(spec, data.features, data.labels, data.classes, config);
      save_model(result.model, tr_out, ArchiveMeta{true});
      std::cout << "wrote " << tr_out << "\n";
      if (!tr_curve.empty()) {
        Table curve;
        curve.columns = {"epoch", "loss"};
        curve.values.resize(long(result.epoch_loss.size()), 2);
        for (size_t i = 0; i < result.epoch_loss.size(); ++i) {
          curve.values(long(i), 0) = double(i);
          curve.values(long(i), 1) = result.epoch_loss[i];
        }
        save_table(tr_curve, curve);
        std::cout << "wrote " << tr_curve << "\n";
      }
    } else if (*bench) {
      std::ostringstream csv;
      if (be_suite == "readout-comparison") {
        const auto rows = readout_comparison(be_sizes, be_seed, be_bandwidth);
        csv << "size,method,accuracy,wall_clock_ms\n";
        for (const auto& row : rows) {
          csv << row.size << "," << row.method << "," << row.accuracy << "," << row.wall_ms
              << "\n";
          std::cout << row.size << " " << row.method << " accuracy=" << row.accuracy
                    << " wall_ms=" << row.wall_ms << "\n";
        }
      } else if (be_suite == "lazy-scaling") {
        const auto rows = lazy_scaling(be_sizes, be_bandwidth, be_queries, be_seed);
        csv << "size,index_build_ms,per_query_us\n";
        for (const auto& row : rows) {
          csv << row.size << "," << row.build_ms << "," << row.per_query_us << "\n";
          std::cout << row.size << " build_ms=" << row.build_ms
                    << " per_query_us=" << row.per_query_us << "\n";
        }
      } else {
        throw InputError("unknown bench suite '" + be_suite + "'");
      }
      if (!be_out.empty()) {
        std::ofstream out(be_out);
        if (!out) throw InputError("cannot open file for writing: " + be_out);
        out << csv.str();
        std::cout << "wrote " << be_out << "\n";
      }
    } else if (*gen) {
      Table out;
      if (ge_dataset == "clusters" || ge_dataset == "rings") {
        const LabeledData d = ge_dataset == "clusters" ? make_clusters(ge_n, ge_seed)
                                                       : make_rings(ge_n, ge_seed);
        out.columns = {"x0", "x1", "y"};
        out.values.resize(d.x.rows(), 3);
        out.values.leftCols(2) = d.x;
        for (Eigen::Index i = 0; i < d.labels.size(); ++i) out.values(i, 2) = d.labels[i];
      } else if (ge_dataset == "sine1d") {
        const RegressionData d = make_sine1d(ge_n, ge_seed);
        out.columns = {"x0", "y"};
        out.values.resize(d.x.rows(), 2);
        out.values.col(0) = d.x.col(0);
        out.values.col(1) = d.y.col(0);
      } else {
        throw InputError("unknown dataset '" + ge_dataset + "'");
      }
      save_table(ge_out, out);
      std::cout << "wrote " << ge_out << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace sk
