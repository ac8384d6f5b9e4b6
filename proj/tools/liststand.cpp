// liststand command-line front end.

#include "liststand/engine.hpp"
#include "liststand/error.hpp"
#include "liststand/export.hpp"
#include "liststand/message_io.hpp"
#include "liststand/service.hpp"
#include "liststand/text.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

using namespace liststand;
using json = nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
  if (path == "-") {
    std::ostringstream ss;
    ss << std::cin.rdbuf();
    return ss.str();
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_output(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
  if (!out) throw Error(ErrorCode::io, "cannot write " + path);
}

json read_json(const std::string& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::invalid_argument, path + ": " + e.what());
  }
}

std::string default_data_dir() {
  const char* env = std::getenv("LISTSTAND_DATA");
  return env ? env : "";
}

bool parse_switch(const std::string& v) {
  if (v == "on" || v == "true" || v == "1" || v == "yes") return true;
  if (v == "off" || v == "false" || v == "0" || v == "no") return false;
  throw Error(ErrorCode::invalid_argument, "expected on/off, got " + v);
}

/// Options shared by every command that analyses a corpus, either from a
/// message dump or from the warehouse.
struct CorpusArgs {
  std::string in;
  std::string entities;
  std::string data = default_data_dir();
  std::string rules = "r1,r2";
  std::string institutions;
  std::string subject_fallback = "off";

  void add(CLI::App* cmd) {
    cmd->add_option("--in", in, "messages JSON-lines dump");
    cmd->add_option("--entities", entities, "entities.json from `liststand entities`");
    cmd->add_option("--data", data, "warehouse directory (default $LISTSTAND_DATA)");
    cmd->add_option("--rules", rules, "identity rules, e.g. r1,r2,r3");
    cmd->add_option("--institutions", institutions, "institution map CSV");
    cmd->add_option("--subject-fallback", subject_fallback, "on|off");
  }

  EngineConfig engine_config() const {
    EngineConfig c;
    if (!data.empty()) c.data_dir = data;
    c.identity = ResolveConfig::from_rule_list(rules);
    if (!institutions.empty()) c.identity.institutions = InstitutionMap::load(institutions);
    c.threads.subject_fallback = parse_switch(subject_fallback);
    return c;
  }

  std::shared_ptr<const Corpus> load() const {
    EngineConfig c = engine_config();
    if (in.empty()) {
      if (!c.data_dir) throw Error(ErrorCode::invalid_argument, "give --in messages.jsonl or --data <dir>");
      return Engine(c).corpus();
    }
    auto corpus = std::make_shared<Corpus>();
    corpus->messages = messages_from_jsonl(read_file(in));
    corpus->catalog = entities.empty() ? resolve_entities(corpus->messages, c.identity)
                                       : entities_from_json(read_json(entities));
    corpus->forest = build_threads(corpus->messages, c.threads);
    return corpus;
  }

  InstitutionMap institution_map() const {
    return institutions.empty() ? engine_config().identity.institutions : InstitutionMap::load(institutions);
  }
};

EngineConfig data_config(const std::string& data) {
  if (data.empty()) throw Error(ErrorCode::invalid_argument, "no data directory: pass --data or set LISTSTAND_DATA");
  EngineConfig c;
  c.data_dir = data;
  return c;
}

std::string graph_text(const SocialGraph& g, const std::string& format) {
  if (format == "json") return graph_to_json(g).dump(2) + "\n";
  switch (parse_export_format(format)) {
    case ExportFormat::graphml: return to_graphml(g);
    case ExportFormat::dot: return to_dot(g);
    case ExportFormat::pajek: return to_pajek(g);
    default: throw Error(ErrorCode::invalid_argument, "not a graph format: " + format);
  }
}

volatile std::sig_atomic_t stop_requested = 0;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"liststand: mailing-list archives as a sociological warehouse"};
  app.require_subcommand(1);
  std::function<void()> action;

  // ingest
  std::vector<std::string> ingest_sources;
  std::string ingest_kind = "mbox_file", ingest_out, ingest_data, ingest_tags;
  unsigned ingest_workers = 0;
  auto* ingest = app.add_subcommand("ingest", "parse mailboxes into a cleaned message dump");
  ingest->add_option("--source", ingest_sources, "mbox file, archive directory or URL list")->required();
  ingest->add_option("--kind", ingest_kind, "mbox_file|archive_dir|url_list");
  ingest->add_option("--out", ingest_out, "JSON-lines output (default stdout)");
  ingest->add_option("--data", ingest_data, "also store into this warehouse directory");
  ingest->add_option("--list-tags", ingest_tags, "comma-separated subject tags to strip");
  ingest->add_option("--workers", ingest_workers, "parser threads (0 = all cores)");
  ingest->callback([&] {
    action = [&] {
      std::vector<MailboxSource> sources;
      for (const auto& s : ingest_sources) sources.push_back({s, parse_source_kind(ingest_kind), s});
      LoadOptions options;
      options.workers = ingest_workers;
      for (const auto& t : text::split(ingest_tags, ',')) {
        if (!text::trim(t).empty()) options.normalize.list_tags.push_back(std::string(text::trim(t)));
      }
      LoadResult r = load_sources(sources, options);
      for (const auto& w : r.warnings) std::cerr << "warning: " << w.source_id << "@" << w.offset << ": " << w.message << "\n";
      for (const auto& e : r.errors) std::cerr << "error: " << e.source_id << ": " << e.message << "\n";
      std::size_t loaded = r.messages.size();
      if (!ingest_data.empty()) {
        Engine engine(data_config(ingest_data));
        IngestReport rep = engine.store_messages(r.messages);
        std::cerr << "stored " << rep.stored << " new message(s) in " << ingest_data << "\n";
      }
      if (!ingest_out.empty() || ingest_data.empty()) write_output(ingest_out, messages_to_jsonl(r.messages));
      std::cerr << loaded << " message(s), " << r.duplicates << " duplicate(s) dropped, " << r.errors.size()
                << " source error(s)\n";
      if (!r.errors.empty() && loaded == 0) throw Error(ErrorCode::io, "no source could be read");
    };
  });

  // store
  std::string store_in, store_data = default_data_dir();
  auto* store = app.add_subcommand("store", "add a message dump to the warehouse");
  store->add_option("--in", store_in, "messages JSON-lines")->required();
  store->add_option("--data", store_data, "warehouse directory");
  store->callback([&] {
    action = [&] {
      Engine engine(data_config(store_data));
      IngestReport rep = engine.store_messages(messages_from_jsonl(read_file(store_in)));
      std::cout << "stored " << rep.stored << ", duplicates " << rep.duplicates << "\n";
    };
  });

  // entities
  std::string ent_in, ent_rules = "r1,r2", ent_inst, ent_out;
  auto* entities = app.add_subcommand("entities", "resolve sender addresses to entities");
  entities->add_option("--in", ent_in, "messages JSON-lines")->required();
  entities->add_option("--rules", ent_rules, "r1,r2[,r3]");
  entities->add_option("--institutions", ent_inst, "institution map CSV (used by r3)");
  entities->add_option("--out", ent_out, "entities.json (default stdout)");
  entities->callback([&] {
    action = [&] {
      ResolveConfig config = ResolveConfig::from_rule_list(ent_rules);
      if (!ent_inst.empty()) config.institutions = InstitutionMap::load(ent_inst);
      auto catalog = resolve_entities(messages_from_jsonl(read_file(ent_in)), config);
      write_output(ent_out, entities_to_json(catalog).dump(2) + "\n");
    };
  });

  // threads
  CorpusArgs thr;
  std::string thr_out;
  auto* threads = app.add_subcommand("threads", "reconstruct reply threads");
  thr.add(threads);
  threads->add_option("--out", thr_out, "forest.json (default stdout)");
  threads->callback([&] {
    action = [&] { write_output(thr_out, forest_to_json(thr.load()->forest).dump(2) + "\n"); };
  });

  // discussions
  CorpusArgs disc;
  std::size_t disc_threshold = 2;
  std::string disc_scope = "per_thread", disc_out;
  auto* discussions_cmd = app.add_subcommand("discussions", "entity pairs in discussion");
  disc.add(discussions_cmd);
  discussions_cmd->add_option("--threshold", disc_threshold, "minimum replies in each direction");
  discussions_cmd->add_option("--scope", disc_scope, "per_thread|corpus");
  discussions_cmd->add_option("--out", disc_out, "output JSON (default stdout)");
  discussions_cmd->callback([&] {
    action = [&] {
      auto c = disc.load();
      auto pairs = discussions(c->forest, entity_lookup(c->messages, c->catalog), disc_threshold,
                               parse_discussion_scope(disc_scope));
      write_output(disc_out, discussions_to_json(pairs).dump(2) + "\n");
    };
  });

  // query
  std::string q_spec, q_out, q_schema_out, q_data = default_data_dir(), q_in;
  auto* query = app.add_subcommand("query", "run a query spec");
  query->add_option("--spec", q_spec, "QuerySpec JSON")->required();
  query->add_option("--out", q_out, "result XML, one document per line (default stdout)");
  query->add_option("--schema-out", q_schema_out, "write the inferred result schema here");
  query->add_option("--data", q_data, "warehouse directory");
  query->add_option("--in", q_in, "query a message dump instead of a warehouse");
  query->callback([&] {
    action = [&] {
      QuerySpec spec = query_from_json(read_json(q_spec));
      EngineConfig config;
      if (q_in.empty()) config = data_config(q_data);
      Engine engine(config);
      if (!q_in.empty()) engine.store_messages(messages_from_jsonl(read_file(q_in)));
      QueryResult r = engine.query(spec);
      write_output(q_out, to_canonical_xml(r.documents));
      if (!q_schema_out.empty()) write_output(q_schema_out, schema_to_json(r.schema).dump(2) + "\n");
    };
  });

  // view
  std::string v_data = default_data_dir(), v_name, v_spec;
  bool v_materialized = false;
  auto* view = app.add_subcommand("view", "manage views");
  view->require_subcommand(1);
  view->add_option("--data", v_data, "warehouse directory");
  view->fallthrough();
  auto* v_create = view->add_subcommand("create", "register a view");
  v_create->add_option("--name", v_name, "view name")->required();
  v_create->add_option("--spec", v_spec, "QuerySpec JSON")->required();
  v_create->add_flag("--materialized", v_materialized, "store results as a collection");
  v_create->callback([&] {
    action = [&] {
      Engine engine(data_config(v_data));
      ViewDef def = engine.views().register_view(v_name, query_from_json(read_json(v_spec)), v_materialized);
      engine.persist();
      std::cout << view_to_json(def).dump(2) << "\n";
    };
  });
  auto* v_list = view->add_subcommand("list", "list views with staleness");
  v_list->callback([&] {
    action = [&] {
      Engine engine(data_config(v_data));
      for (const auto& v : engine.views().list()) {
        std::cout << v.def.name << "\t" << (v.def.materialized ? "materialized" : "virtual") << "\t"
                  << (v.stale ? "stale" : "fresh") << "\tsource=" << v.def.spec.source << "\n";
      }
    };
  });
  auto* v_refresh = view->add_subcommand("refresh", "rebuild a materialized view");
  v_refresh->add_option("--name", v_name, "view name")->required();
  v_refresh->callback([&] {
    action = [&] {
      Engine engine(data_config(v_data));
      ViewDef def = engine.views().refresh(v_name);
      engine.persist();
      std::cout << def.name << " built at source version " << def.version_built_at.value_or(0) << "\n";
    };
  });

  // stats
  CorpusArgs st;
  std::string st_kind = "posts_per_entity", st_out, st_format = "csv";
  std::size_t st_top = 0;
  bool st_anon = false;
  auto* stats = app.add_subcommand("stats", "ranking tables");
  st.add(stats);
  stats->add_option("--kind", st_kind, "posts_per_entity|posts_per_domain|posters_per_domain");
  stats->add_option("--top", st_top, "keep the first K rows (0 = all)");
  stats->add_flag("--anonymize", st_anon, "replace keys by rank labels");
  stats->add_option("--format", st_format, "csv|json");
  stats->add_option("--out", st_out, "output (default stdout)");
  stats->callback([&] {
    action = [&] {
      auto c = st.load();
      RankedTable t;
      if (st_kind == "posts_per_entity") t = posts_per_entity(c->messages, c->catalog);
      else if (st_kind == "posts_per_domain") t = posts_per_domain(c->messages, st.institution_map());
      else if (st_kind == "posters_per_domain") t = posters_per_domain(c->messages, c->catalog, st.institution_map());
      else throw Error(ErrorCode::invalid_argument, "unknown stats kind: " + st_kind);
      if (st_top) t = t.top(st_top);
      if (st_anon) t = t.anonymized();
      write_output(st_out, st_format == "json" ? table_to_json(t).dump(2) + "\n" : to_csv(t));
    };
  });

  // graph
  CorpusArgs gr;
  std::string gr_kind = "coparticipation", gr_format = "json", gr_out, gr_weighting = "threads";
  std::int64_t gr_min = 1;
  auto* graph = app.add_subcommand("graph", "social graphs");
  gr.add(graph);
  graph->add_option("--kind", gr_kind, "coparticipation");
  graph->add_option("--min-weight", gr_min, "drop lighter edges");
  graph->add_option("--weighting", gr_weighting, "threads|message_pairs");
  graph->add_option("--format", gr_format, "json|graphml|dot|pajek");
  graph->add_option("--out", gr_out, "output (default stdout)");
  graph->callback([&] {
    action = [&] {
      if (gr_kind != "coparticipation") throw Error(ErrorCode::invalid_argument, "unknown graph kind: " + gr_kind);
      auto c = gr.load();
      GraphOptions o;
      o.min_weight = gr_min;
      o.institutions = gr.institution_map();
      if (gr_weighting == "message_pairs") o.weighting = CoparticipationWeight::message_pairs;
      else if (gr_weighting != "threads") throw Error(ErrorCode::invalid_argument, "unknown weighting: " + gr_weighting);
      write_output(gr_out, graph_text(coparticipation_graph(c->messages, c->forest, c->catalog, o), gr_format));
    };
  });

  // profile
  CorpusArgs pr;
  EntityId pr_entity = 0;
  std::string pr_out, pr_format = "csv";
  auto* profile = app.add_subcommand("profile", "answering profile of one entity");
  pr.add(profile);
  profile->add_option("--entity", pr_entity, "entity id")->required();
  profile->add_option("--format", pr_format, "csv|json");
  profile->add_option("--out", pr_out, "output (default stdout)");
  profile->callback([&] {
    action = [&] {
      auto c = pr.load();
      AnsweringProfile p = answering_profile(pr_entity, c->messages, c->forest, c->catalog);
      if (pr_format == "json") {
        json rows = json::array();
        for (const auto& r : p.rows) rows.push_back({{"other", r.other}, {"replies_to_other", r.replies_to_other}, {"replies_from_other", r.replies_from_other}});
        write_output(pr_out, json{{"subject", p.subject}, {"rows", rows}}.dump(2) + "\n");
      } else {
        write_output(pr_out, to_csv(p));
      }
    };
  });

  // export
  std::string ex_format, ex_in, ex_out;
  auto* exp = app.add_subcommand("export", "convert graphs, tables and messages");
  exp->add_option("--format", ex_format, "graphml|dot|pajek|csv|jsonl|canonical_xml")->required();
  exp->add_option("--in", ex_in, "graph JSON, table JSON/CSV or messages JSON-lines")->required();
  exp->add_option("--out", ex_out, "output (default stdout)");
  exp->callback([&] {
    action = [&] {
      ExportFormat f = parse_export_format(ex_format);
      if (is_graph_format(f)) {
        write_output(ex_out, graph_text(graph_from_json(read_json(ex_in)), ex_format));
      } else if (f == ExportFormat::csv) {
        std::string content = read_file(ex_in);
        auto first = content.find_first_not_of(" \t\r\n");
        RankedTable t = first != std::string::npos && content[first] == '{' ? table_from_json(json::parse(content))
                                                                            : table_from_csv(content);
        write_output(ex_out, to_csv(t));
      } else {
        auto messages = messages_from_jsonl(read_file(ex_in));
        if (f == ExportFormat::jsonl) {
          write_output(ex_out, to_jsonl(messages));
        } else {
          std::vector<TreeNode> docs;
          for (const auto& m : messages) docs.push_back(message_to_tree(m));
          write_output(ex_out, to_canonical_xml(docs));
        }
      }
    };
  });

  // facts
  std::string f_data = default_data_dir(), f_in, f_agent, f_as_of, f_out;
  auto* facts = app.add_subcommand("facts", "sourced facts");
  facts->require_subcommand(1);
  facts->add_option("--data", f_data, "warehouse directory");
  facts->fallthrough();
  auto* f_assert = facts->add_subcommand("assert", "assert facts from JSON-lines");
  f_assert->add_option("--in", f_in, "facts JSON-lines")->required();
  f_assert->callback([&] {
    action = [&] {
      Engine engine(data_config(f_data));
      auto ids = engine.assert_facts(read_file(f_in));
      std::cout << "asserted " << ids.size() << " fact(s)\n";
    };
  });
  auto* f_query = facts->add_subcommand("query", "facts known by an agent");
  f_query->add_option("--agent", f_agent, "agent name")->required();
  f_query->add_option("--as-of", f_as_of, "ISO-8601 timestamp (default: now)");
  f_query->add_option("--out", f_out, "JSON-lines output (default stdout)");
  f_query->callback([&] {
    action = [&] {
      Engine engine(data_config(f_data));
      Timestamp as_of = std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
      if (!f_as_of.empty()) {
        auto t = parse_iso8601(f_as_of);
        if (!t) throw Error(ErrorCode::invalid_argument, "bad --as-of: " + f_as_of);
        as_of = *t;
      }
      std::string out;
      for (const auto& f : engine.known_by(f_agent, as_of)) out += fact_to_json(f).dump() + "\n";
      write_output(f_out, out);
    };
  });
  auto* f_rec = facts->add_subcommand("recommendations", "recommendation table from authorship facts");
  std::string f_inst;
  f_rec->add_option("--institutions", f_inst, "institution map CSV");
  f_rec->add_option("--out", f_out, "CSV output (default stdout)");
  f_rec->callback([&] {
    action = [&] {
      Engine engine(data_config(f_data));
      InstitutionMap map = f_inst.empty() ? engine.config().identity.institutions : InstitutionMap::load(f_inst);
      write_output(f_out, to_csv(recommendation_table(engine.facts(), map)));
    };
  });

  // serve
  std::string s_data = default_data_dir(), s_host = "127.0.0.1";
  int s_port = 8080;
  auto* serve = app.add_subcommand("serve", "run the HTTP API");
  serve->add_option("--data", s_data, "warehouse directory (default $LISTSTAND_DATA)");
  serve->add_option("--port", s_port, "TCP port (0 = any)");
  serve->add_option("--host", s_host, "bind address");
  serve->callback([&] {
    action = [&] {
      Engine engine(data_config(s_data));
      Service service(engine);
      int port = service.bind(s_host, s_port);
      if (port < 0) throw Error(ErrorCode::io, "cannot bind " + s_host + ":" + std::to_string(s_port));
      std::cerr << "listening on http://" << s_host << ":" << port << "\n";
      std::signal(SIGINT, [](int) { stop_requested = 1; });
      std::signal(SIGTERM, [](int) { stop_requested = 1; });
      service.start_background();
      while (!stop_requested) std::this_thread::sleep_for(std::chrono::milliseconds(200));
      service.stop();
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  try {
    if (action) action();
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.code()) << "): " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
