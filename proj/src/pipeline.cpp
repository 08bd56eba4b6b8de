#include "resttest/pipeline.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <fstream>
#include <ostream>
#include <random>
#include <sstream>

#include "resttest/embedding.hpp"
#include "resttest/errors.hpp"
#include "resttest/persistence.hpp"
#include "resttest/reporting.hpp"
#include "resttest/spdg.hpp"

namespace resttest {

namespace {

using Clock = std::chrono::steady_clock;

bool is_registration(const OperationSpec& op) {
  auto tokens = tokenize_identifier(op.id + " " + op.path);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i] == "register" || tokens[i] == "signup") return true;
    if (tokens[i] == "sign" && i + 1 < tokens.size() && tokens[i + 1] == "up") return true;
  }
  return false;
}

std::string leaf_name(std::string_view path) {
  std::size_t dot = path.rfind('.');
  return std::string(dot == std::string_view::npos ? path : path.substr(dot + 1));
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace

void acquire_tokens(const ApiModel& model, HttpDispatcher& dispatcher, HandleContext& ctx,
                    Rng& rng) {
  std::vector<const OperationSpec*> accounts;
  for (const auto& op : model.operations) {
    if (is_account_operation(op)) accounts.push_back(&op);
  }
  std::stable_partition(accounts.begin(), accounts.end(),
                        [](const OperationSpec* op) { return is_registration(*op); });

  std::map<std::string, Json> shared;
  for (const OperationSpec* op : accounts) {
    OperationAgentInfo info = describe_operation(*op);
    RequestPlan plan;
    plan.operation_id = op->id;
    for (const auto& item : info.items) plan.included_items.push_back(item.label);
    for (const auto& field : info.value_fields) {
      std::string name = leaf_name(field.path);
      auto it = shared.find(name);
      if (it == shared.end() || !conforms(it->second, field.schema)) {
        it = shared.insert_or_assign(name, default_value(field.schema, rng)).first;
      }
      plan.fields.push_back({field.path, ValueSource::Default, it->second, std::nullopt});
    }
    if (op->request_body) plan.media_type = op->request_body->preferred().media_type;
    RequestDraft draft;
    try {
      draft = build_request(plan, model);
    } catch (const MissingPathParam&) {
      continue;
    }
    HttpExchange exchange = dispatcher.send(render_request(draft), op->id);
    handle_response(exchange, plan, draft, ctx);
  }
}

RunSummary run_pipeline(const RunConfig& config, RunIo io) {
  RunSummary summary;
  auto fail = [&](const std::string& message) {
    io.err << "error: " << message << '\n';
    summary.exit_code = kExitSetupFailure;
    return summary;
  };
  auto warn = [&](const std::string& message) { io.err << message << '\n'; };

  // Specification.
  std::string spec_text;
  ApiModel model;
  try {
    spec_text = read_file(config.spec_path);
    ParseOptions options;
    options.max_ref_depth = config.max_ref_depth;
    options.server_url_override = config.server_url;
    model = parse_spec(spec_text, options);
  } catch (const Error& e) {
    return fail(e.what());
  }
  io.out << fmt::format("Parsed specification '{}': {} operations, base URL {}\n", model.title,
                        model.operations.size(), model.base_url);

  // Dependency graph.
  std::string spec_digest = sha256_hex(spec_text);
  CacheKey graph_key{spec_digest, CacheKind::Spdg, graph_config_digest(config)};
  std::optional<Spdg> graph;
  bool from_cache = false;
  if (config.cache_enabled) {
    if (auto cached = cache_get(config.cache_dir, graph_key, warn)) {
      try {
        graph = graph_from_json(*cached);
        from_cache = true;
      } catch (const std::exception& e) {
        warn(std::string("warning: ignoring cached dependency graph: ") + e.what());
      }
    }
  }
  if (!graph) {
    try {
      EmbeddingTable table = load_embeddings(config.embedding_path);
      graph = build_graph(model, table, config.similarity_threshold, config.fallback_k);
    } catch (const Error& e) {
      return fail(e.what());
    }
    if (config.cache_enabled) {
      try {
        cache_put(config.cache_dir, graph_key, graph_to_json(*graph));
      } catch (const CacheWriteError& e) {
        warn(std::string("warning: ") + e.what());
      }
    }
  }
  io.out << fmt::format("Built semantic property dependency graph: {} nodes, {} edges{}\n",
                        graph->nodes.size(), graph->edges.size(),
                        from_cache ? " (from cache)" : "");
  if (config.dump_graph) {
    std::error_code ec;
    std::filesystem::create_directories(config.output_dir, ec);
    std::filesystem::path path = std::filesystem::path(config.output_dir) / "spdg.json";
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << graph_to_json(*graph).dump(2) << '\n';
    if (!out) {
      warn("warning: cannot write " + path.string());
    } else {
      io.out << "Wrote dependency graph to " << path.string() << '\n';
    }
  }

  // Agents.
  const bool learning = !config.baseline_mode;
  const bool use_llm = learning && config.llm_enabled;
  std::optional<AgentSet> agents;
  if (learning) {
    agents = init_agents(model, *graph,
                         AgentConfig{config.learning_rate, config.discount, use_llm});
    std::size_t states = 0;
    for (auto kind : {AgentKind::Operation, AgentKind::Parameter, AgentKind::Value,
                      AgentKind::Dependency, AgentKind::Header}) {
      states += agents->table(kind).state_count();
    }
    io.out << fmt::format("Initialized Q-tables for 5 agents: {} states\n", states);
  } else {
    io.out << "Initialized baseline mode: uniform random choices, no Q-tables\n";
  }

  CacheKey llm_key{spec_digest, CacheKind::LlmValues, llm_config_digest(config)};
  std::optional<LlmValueCache> llm;
  if (use_llm) {
    LlmConfig llm_config = config.llm;
    llm.emplace([llm_config](const ValueRequest& r) { return llm_generate(r, llm_config); },
                llm_config, warn);
    if (config.cache_enabled) {
      if (auto cached = cache_get(config.cache_dir, llm_key, warn)) llm->load(*cached);
    }
  }

  // State of the run.
  Rng rng(config.seed ? *config.seed : std::random_device{}());
  RunState run;
  run.title = model.title;
  run.spec_name = std::filesystem::path(config.spec_path).stem().string();
  run.duration_budget_seconds = config.duration_seconds;
  for (const auto& op : model.operations) run.operation_ids.push_back(op.id);
  ResponseStore store;
  TokenStore tokens;
  HttpDispatcher dispatcher(std::chrono::milliseconds(
      static_cast<long long>(config.request_timeout_seconds * 1000.0)));
  HandleContext handle{run, store, *graph, agents ? &*agents : nullptr, model, &tokens, {}};
  Planner planner(model, agents ? &*agents : nullptr);
  PlannerContext plan_ctx{*graph, store, tokens, llm ? &*llm : nullptr};

  io.out << fmt::format("Starting request generation: budget {} s{}\n",
                        config.duration_seconds,
                        config.max_requests ? fmt::format(", at most {} requests",
                                                          config.max_requests)
                                            : std::string());
  run.start = Clock::now();
  auto deadline =
      run.start + std::chrono::duration_cast<Clock::duration>(
                      std::chrono::duration<double>(config.duration_seconds));
  auto interval = std::chrono::duration_cast<Clock::duration>(
      std::chrono::duration<double>(config.progress_interval_seconds));
  auto next_progress = run.start + interval;
  auto stopped = [&] {
    return (io.stop && io.stop->load()) || Clock::now() >= deadline ||
           (config.max_requests && run.total_requests >= config.max_requests);
  };

  if (learning) acquire_tokens(model, dispatcher, handle, rng);

  std::uint64_t episode = 0;
  while (!stopped()) {
    double epsilon = decay_epsilon(config.epsilon, episode++);
    RequestPlan plan = planner.plan(plan_ctx, epsilon, rng);
    RequestDraft draft;
    try {
      draft = build_request(plan, model);
    } catch (const MissingPathParam& e) {
      warn(std::string("warning: ") + e.what());
      continue;
    }
    MutationResult mutated = mutate_request(draft, config.mutation, rng, &store);
    HttpExchange exchange = dispatcher.send(render_request(mutated.request), plan.operation_id);
    exchange.mutation_log = std::move(mutated.log);
    handle_response(exchange, plan, mutated.request, handle);
    if (llm) run.llm_cost = llm->cost().total();

    auto now = Clock::now();
    if (now >= next_progress) {
      io.out << progress_line(run, now) << '\n' << std::flush;
      next_progress = now + interval;
    }
  }
  io.out << progress_line(run, Clock::now()) << '\n';

  // Shutdown.
  run.q_tables = agents ? agents->to_json() : Json::object();
  if (llm) {
    run.llm_cost = llm->cost().total();
    if (config.cache_enabled) {
      try {
        cache_put(config.cache_dir, llm_key, llm->to_json());
      } catch (const CacheWriteError& e) {
        warn(std::string("warning: ") + e.what());
      }
    }
  }
  try {
    summary.reports = write_reports(run, config.output_dir);
  } catch (const ReportWriteError& e) {
    io.err << "error: " << e.what() << '\n';
    for (const auto& path : e.written()) io.err << "  written: " << path << '\n';
    summary.exit_code = kExitSetupFailure;
  }
  summary.total_requests = run.total_requests;
  summary.transport_errors = run.transport_errors;
  summary.unique_server_errors = run.unique_server_errors.size();
  summary.successful_operations = run.successful_operations.size();
  if (summary.exit_code == kExitOk) {
    io.out << fmt::format("Finished: {} requests, {} unique server errors, reports in {}\n",
                          run.total_requests, run.unique_server_errors.size(),
                          config.output_dir);
  }
  return summary;
}

}  // namespace resttest
