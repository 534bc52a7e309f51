#include "staterecall/task.hpp"

#include "staterecall/error.hpp"

namespace staterecall {

using nlohmann::json;

std::size_t TaskInstance::m() const {
  return std::visit([](const auto& p) { return p.m; }, payload);
}

std::size_t TaskInstance::n() const {
  return std::visit([](const auto& p) { return p.n; }, payload);
}

const std::string& TaskInstance::correct_letter() const {
  return std::visit([](const auto& p) -> const std::string& { return p.correct_letter; }, payload);
}

std::vector<std::string> TaskInstance::option_letters() const {
  const std::size_t count = family == Family::AstroRecall ? 2 : collision().options.size();
  std::vector<std::string> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(option_letter(i));
  return out;
}

std::vector<std::string> TaskInstance::option_texts() const {
  return std::visit([](const auto& p) { return p.option_texts(); }, payload);
}

TaskInstance generate_task(Family family, const Catalog* catalog, std::size_t m, std::size_t n,
                           std::size_t index, Seed base_seed, const GenerationConfig& cfg) {
  TaskInstance task;
  task.family = family;
  task.index = index;
  task.instance_seed = derive_instance_seed(base_seed, family, m, n, index);
  if (family == Family::AstroRecall) {
    if (catalog == nullptr) throw Error(ErrorCode::InvalidArgument, "astro generation needs a catalog");
    task.payload = generate_astro(*catalog, m, n, task.instance_seed, cfg.swap_pattern);
  } else {
    task.payload = generate_collision(m, n, task.instance_seed, cfg.pool);
  }
  return task;
}

namespace {

json astro_json(const AstroInstance& a) {
  json rows = json::array();
  for (const auto& row : a.rows) {
    json cells = json::array();
    for (const auto& col : a.columns) cells.push_back(row.at(col));
    rows.push_back(std::move(cells));
  }
  json binding = json::object();
  for (const auto& [var, row] : a.binding) binding[var.name] = row;
  json swaps = json::array();
  for (const auto& op : a.swaps) {
    swaps.push_back({op.left_first.name, op.left_second.name, op.right_first.name,
                     op.right_second.name});
  }
  return {
      {"m", a.m},
      {"n", a.n},
      {"seed", a.seed},
      {"swap_pattern", swap_pattern_token(a.pattern)},
      {"columns", a.columns},
      {"target_column", a.target_column},
      {"retrieve_column", a.retrieve_column},
      {"rows", std::move(rows)},
      {"row_catalog_index", a.row_catalog_index},
      {"binding", std::move(binding)},
      {"swaps", std::move(swaps)},
      {"query", a.query_var.name},
      {"options", {a.option_a, a.option_b}},
      {"correct_letter", a.correct_letter},
  };
}

json collision_json(const CollisionInstance& c) {
  json velocities = json::object();
  for (const auto& [label, v] : c.velocities) velocities[label.name] = v;
  json collisions = json::array();
  for (const auto& [x, y] : c.collisions) collisions.push_back({x.name, y.name});
  return {
      {"m", c.m},
      {"n", c.n},
      {"seed", c.seed},
      {"velocity_pool", {c.pool.lo, c.pool.hi}},
      {"velocities", std::move(velocities)},
      {"collisions", std::move(collisions)},
      {"query", c.query.name},
      {"options", c.options},
      {"correct_letter", c.correct_letter},
  };
}

AstroInstance astro_from_json(const json& j) {
  AstroInstance a;
  a.m = j.at("m").get<std::size_t>();
  a.n = j.at("n").get<std::size_t>();
  a.seed = j.at("seed").get<Seed>();
  a.pattern = parse_swap_pattern(j.at("swap_pattern").get<std::string>());
  a.columns = j.at("columns").get<std::vector<std::string>>();
  a.target_column = j.at("target_column").get<std::string>();
  a.retrieve_column = j.at("retrieve_column").get<std::string>();
  for (const auto& cells : j.at("rows")) {
    if (cells.size() != a.columns.size()) {
      throw Error(ErrorCode::MalformedRecord, "astro row width does not match columns");
    }
    CatalogRow row;
    for (std::size_t c = 0; c < a.columns.size(); ++c) {
      row.cells[a.columns[c]] = cells[c].get<std::string>();
    }
    a.rows.push_back(std::move(row));
  }
  a.row_catalog_index = j.at("row_catalog_index").get<std::vector<std::size_t>>();
  for (const auto& [name, row] : j.at("binding").items()) a.binding[{name}] = row.get<std::size_t>();
  for (const auto& s : j.at("swaps")) {
    a.swaps.push_back({{s.at(0).get<std::string>()},
                       {s.at(1).get<std::string>()},
                       {s.at(2).get<std::string>()},
                       {s.at(3).get<std::string>()}});
  }
  a.query_var = {j.at("query").get<std::string>()};
  a.option_a = j.at("options").at(0).get<std::string>();
  a.option_b = j.at("options").at(1).get<std::string>();
  a.correct_letter = j.at("correct_letter").get<std::string>();
  return a;
}

CollisionInstance collision_from_json(const json& j) {
  CollisionInstance c;
  c.m = j.at("m").get<std::size_t>();
  c.n = j.at("n").get<std::size_t>();
  c.seed = j.at("seed").get<Seed>();
  c.pool = {j.at("velocity_pool").at(0).get<std::int64_t>(),
            j.at("velocity_pool").at(1).get<std::int64_t>()};
  for (const auto& [name, v] : j.at("velocities").items()) c.velocities[{name}] = v.get<std::int64_t>();
  for (const auto& p : j.at("collisions")) {
    c.collisions.emplace_back(ParticleLabel{p.at(0).get<std::string>()},
                              ParticleLabel{p.at(1).get<std::string>()});
  }
  c.query = {j.at("query").get<std::string>()};
  c.options = j.at("options").get<std::vector<std::int64_t>>();
  c.correct_letter = j.at("correct_letter").get<std::string>();
  return c;
}

}  // namespace

json to_json(const TaskInstance& task) {
  json payload = task.family == Family::AstroRecall ? astro_json(task.astro())
                                                    : collision_json(task.collision());
  return {
      {"schema", kInstanceSchema},
      {"family", family_token(task.family)},
      {"index", task.index},
      {"instance_seed", task.instance_seed},
      {"payload", std::move(payload)},
  };
}

TaskInstance task_from_json(const json& j) {
  try {
    if (j.at("schema").get<int>() != kInstanceSchema) {
      throw Error(ErrorCode::MalformedRecord, "unsupported instance schema");
    }
    TaskInstance task;
    task.family = parse_family(j.at("family").get<std::string>());
    task.index = j.at("index").get<std::size_t>();
    task.instance_seed = j.at("instance_seed").get<Seed>();
    if (task.family == Family::AstroRecall) {
      task.payload = astro_from_json(j.at("payload"));
    } else {
      task.payload = collision_from_json(j.at("payload"));
    }
    return task;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedRecord, std::string("instance: ") + e.what());
  }
}

std::string canonical_string(const TaskInstance& task) { return to_json(task).dump(); }

}  // namespace staterecall
