#include "splitlab/protocols/experiment.hpp"

#include "splitlab/errors.hpp"

namespace splitlab::proto {

split::SplitSpec split_spec_for(Method method, const ExperimentSetup& setup) {
  const auto topology = method_topology(method);
  if (!topology) {
    throw ValidationError("method " + std::string(method_id(method)) + " is not a split method");
  }
  split::SplitSpec spec;
  spec.topology = *topology;
  spec.cut_index = setup.cut_index;
  spec.tail_len = *topology == Topology::nls ? setup.tail_len : 0;
  spec.validate(setup.initial_model.num_layers());
  return spec;
}

MethodRun run_method(Method method, const ExperimentSetup& setup) {
  MethodRun run;
  const auto& init = setup.initial_model;
  const auto& clients = setup.clients;
  const auto& cfg = setup.train;

  switch (method) {
    case Method::centralized:
      run.outcome = train_centralized(init, clients, cfg, run.flops);
      break;
    case Method::fl:
      run.outcome = train_federated(init, clients, cfg, run.ledger, run.flops);
      break;
    case Method::sl_ls_ac:
    case Method::sl_nls_ac:
      run.outcome = train_split(init, clients, split_spec_for(method, setup), Schedule::ac, cfg,
                                run.ledger, run.flops);
      break;
    case Method::sl_ls_am:
    case Method::sl_nls_am:
      run.outcome = train_split(init, clients, split_spec_for(method, setup), Schedule::am, cfg,
                                run.ledger, run.flops);
      break;
    case Method::sflv2_ls:
    case Method::sflv2_nls:
      run.outcome =
          train_sflv2(init, clients, split_spec_for(method, setup), cfg, run.ledger, run.flops);
      break;
    case Method::sflv3_ls:
    case Method::sflv3_nls:
      run.outcome =
          train_sflv3(init, clients, split_spec_for(method, setup), cfg, run.ledger, run.flops);
      break;
  }

  const TestMetrics test = evaluate(run.outcome.best, pooled_test(clients), cfg.threshold);
  MetricsReport& r = run.report;
  r.method = method;
  r.seed = setup.seed;
  r.auroc = test.auroc;
  r.auprc = test.auprc;
  r.f1 = test.f1;
  r.kappa = test.kappa;
  r.epochs = run.outcome.epochs.size();
  double seconds = 0.0;
  for (const auto& e : run.outcome.epochs) seconds += e.wall_clock_seconds;
  r.wall_s_per_epoch = r.epochs == 0 ? 0.0 : seconds / static_cast<double>(r.epochs);
  const auto traffic = run.ledger.totals();
  r.bytes_train = traffic.phase(acct::Phase::train);
  r.bytes_eval = traffic.phase(acct::Phase::eval);
  r.bytes_model_sync = traffic.phase(acct::Phase::model_sync);
  const auto& flops = run.flops.snapshot();
  r.flops_server = flops.server;
  r.flops_avg_client = flops.avg_client();
  r.flops_averaging = flops.averaging;
  r.best_epoch = run.outcome.checkpoint ? run.outcome.checkpoint->epoch : 0;
  return run;
}

}  // namespace splitlab::proto
