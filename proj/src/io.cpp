// Copyright 2026 The OptiWB Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "optiwb/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string_view>

#include <json.hpp>

#include "optiwb/kinematics.hpp"
#include "optiwb/objective.hpp"
#include "optiwb/trajectory.hpp"

namespace optiwb {
namespace {

using nlohmann::json;
using Keys = std::initializer_list<std::string_view>;

std::string join(const std::vector<std::string>& items) {
  std::ostringstream out;
  for (std::size_t i = 0; i < items.size(); ++i) out << (i ? "; " : "") << items[i];
  return out.str();
}

std::string child(const std::string& path, std::string_view key) {
  return path.empty() ? std::string(key) : path + "." + std::string(key);
}

std::string element(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

// Collects every problem with its document path instead of stopping at the first.
class Reader {
 public:
  std::vector<std::string> errors;

  void fail(const std::string& path, const std::string& message) { errors.push_back(path + ": " + message); }

  bool object(const json& j, const std::string& path, Keys allowed) {
    if (!j.is_object()) {
      fail(path, "expected an object");
      return false;
    }
    for (const auto& [key, value] : j.items())
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) fail(child(path, key), "unknown field");
    return true;
  }

  const json* get(const json& obj, const std::string& path, std::string_view key, bool required = true) {
    const auto it = obj.find(key);
    if (it == obj.end()) {
      if (required) fail(child(path, key), "missing");
      return nullptr;
    }
    return &*it;
  }

  double number(const json& j, const std::string& path) {
    if (!j.is_number()) {
      fail(path, "expected a number");
      return 0.0;
    }
    return j.get<double>();
  }

  double number(const json& obj, const std::string& path, std::string_view key, double fallback,
                bool required = true) {
    const json* j = get(obj, path, key, required);
    return j ? number(*j, child(path, key)) : fallback;
  }

  int integer(const json& obj, const std::string& path, std::string_view key, int fallback, bool required = true) {
    const json* j = get(obj, path, key, required);
    if (j == nullptr) return fallback;
    if (!j->is_number_integer()) {
      fail(child(path, key), "expected an integer");
      return fallback;
    }
    return j->get<int>();
  }

  std::string string(const json& obj, const std::string& path, std::string_view key, bool required = true) {
    const json* j = get(obj, path, key, required);
    if (j == nullptr) return {};
    if (!j->is_string()) {
      fail(child(path, key), "expected a string");
      return {};
    }
    return j->get<std::string>();
  }

  bool array(const json& j, const std::string& path, std::size_t size = 0) {
    if (!j.is_array()) {
      fail(path, "expected an array");
      return false;
    }
    if (size != 0 && j.size() != size) {
      fail(path, "expected " + std::to_string(size) + " entries, got " + std::to_string(j.size()));
      return false;
    }
    return true;
  }

  VecX vector(const json& j, const std::string& path, std::size_t size = 0) {
    if (!array(j, path, size)) return VecX::Zero(static_cast<Eigen::Index>(size));
    VecX v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = number(j[i], element(path, i));
    return v;
  }

  Vec2 vec2(const json& j, const std::string& path) { return vector(j, path, 2); }
  Vec3 vec3(const json& j, const std::string& path) { return vector(j, path, 3); }

  // [w, x, y, z]
  Quat quat(const json& j, const std::string& path) {
    const VecX v = vector(j, path, 4);
    return Quat(v[0], v[1], v[2], v[3]);
  }

  Transform3d transform(const json& j, const std::string& path) {
    Transform3d t;
    if (!object(j, path, {"translation", "rotation"})) return t;
    if (const json* p = get(j, path, "translation", false)) t.translation = vec3(*p, child(path, "translation"));
    if (const json* r = get(j, path, "rotation", false)) t.rotation = quat(*r, child(path, "rotation"));
    return t;
  }

  Transform3d transform(const json& obj, const std::string& path, std::string_view key, bool required) {
    const json* j = get(obj, path, key, required);
    return j ? transform(*j, child(path, key)) : Transform3d{};
  }

  std::vector<Vec3> points3(const json& j, const std::string& path) {
    std::vector<Vec3> out;
    if (!array(j, path)) return out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(vec3(j[i], element(path, i)));
    return out;
  }

  ConvexVolume volume(const json& j, const std::string& path) {
    if (!j.is_object()) {
      fail(path, "expected an object");
      return Box{};
    }
    const std::string type = string(j, path, "type");
    if (type == "box") {
      object(j, path, {"type", "half_extents", "pose"});
      Box b;
      if (const json* h = get(j, path, "half_extents")) b.half_extents = vec3(*h, child(path, "half_extents"));
      b.pose = transform(j, path, "pose", false);
      return b;
    }
    if (type == "capsule") {
      object(j, path, {"type", "radius", "a", "b"});
      Capsule c;
      c.radius = number(j, path, "radius", c.radius);
      if (const json* a = get(j, path, "a")) c.a = vec3(*a, child(path, "a"));
      if (const json* b = get(j, path, "b")) c.b = vec3(*b, child(path, "b"));
      return c;
    }
    if (type == "hull") {
      object(j, path, {"type", "vertices", "pose"});
      ConvexHull h;
      if (const json* v = get(j, path, "vertices")) h.vertices = points3(*v, child(path, "vertices"));
      h.pose = transform(j, path, "pose", false);
      return h;
    }
    if (!type.empty()) fail(child(path, "type"), "unknown volume type '" + type + "'");
    return Box{};
  }

  ForbiddenArea forbidden(const json& j, const std::string& path) {
    if (!j.is_object()) {
      fail(path, "expected an object");
      return Polygon{};
    }
    const std::string type = string(j, path, "type");
    if (type == "polygon") {
      object(j, path, {"type", "vertices"});
      Polygon p;
      if (const json* v = get(j, path, "vertices"); v && array(*v, child(path, "vertices")))
        for (std::size_t i = 0; i < v->size(); ++i)
          p.vertices.push_back(vec2((*v)[i], element(child(path, "vertices"), i)));
      return p;
    }
    if (type == "grid") {
      object(j, path, {"type", "origin", "resolution", "width", "height", "cells"});
      OccupancyGrid g;
      if (const json* o = get(j, path, "origin")) g.origin = vec2(*o, child(path, "origin"));
      g.resolution = number(j, path, "resolution", g.resolution);
      g.width = integer(j, path, "width", 0);
      g.height = integer(j, path, "height", 0);
      if (const json* c = get(j, path, "cells"); c && array(*c, child(path, "cells"))) {
        for (std::size_t i = 0; i < c->size(); ++i) {
          const json& cell = (*c)[i];
          if (!cell.is_number_integer() || cell.get<int>() < 0 || cell.get<int>() > 1) {
            fail(element(child(path, "cells"), i), "expected 0 or 1");
            g.cells.push_back(0);
          } else {
            g.cells.push_back(static_cast<std::uint8_t>(cell.get<int>()));
          }
        }
      }
      return g;
    }
    if (!type.empty()) fail(child(path, "type"), "unknown forbidden area type '" + type + "'");
    return Polygon{};
  }

  std::optional<Interval> range(const json& obj, const std::string& path, std::string_view key) {
    const json* j = get(obj, path, key, false);
    if (j == nullptr) return std::nullopt;
    const VecX v = vector(*j, child(path, key), 2);
    return Interval{v[0], v[1]};
  }
};

RobotModel read_robot(Reader& r, const json& j) {
  const std::string path = "robot";
  RobotModel m;
  if (!r.object(j, path,
                {"base_limits", "arm_joints", "arm_mount_transform", "tool_transform", "link_volumes",
                 "camera_transform", "camera_ccd"}))
    return m;
  if (const json* b = r.get(j, path, "base_limits")) {
    const std::string p = child(path, "base_limits");
    if (r.object(*b, p, {"v_max", "omega_max"})) {
      m.base_limits.v_max = r.number(*b, p, "v_max", 0.0);
      m.base_limits.omega_max = r.number(*b, p, "omega_max", 0.0);
    }
  }
  if (const json* joints = r.get(j, path, "arm_joints"); joints && r.array(*joints, child(path, "arm_joints"))) {
    for (std::size_t i = 0; i < joints->size(); ++i) {
      const std::string p = element(child(path, "arm_joints"), i);
      const json& e = (*joints)[i];
      ArmJoint a;
      if (r.object(e, p, {"name", "axis", "origin", "pos_min", "pos_max", "vel_max", "acc_max"})) {
        a.name = r.string(e, p, "name", false);
        if (a.name.empty()) a.name = "a" + std::to_string(i + 1);
        if (const json* ax = r.get(e, p, "axis")) a.axis = r.vec3(*ax, child(p, "axis"));
        a.origin = r.transform(e, p, "origin", false);
        a.pos_min = r.number(e, p, "pos_min", a.pos_min);
        a.pos_max = r.number(e, p, "pos_max", a.pos_max);
        a.vel_max = r.number(e, p, "vel_max", a.vel_max);
        a.acc_max = r.number(e, p, "acc_max", a.acc_max);
      }
      m.arm_joints.push_back(a);
    }
  }
  m.arm_mount_transform = r.transform(j, path, "arm_mount_transform", true);
  m.tool_transform = r.transform(j, path, "tool_transform", false);
  m.camera_transform = r.transform(j, path, "camera_transform", true);
  if (const json* c = r.get(j, path, "camera_ccd")) {
    const std::string p = child(path, "camera_ccd");
    if (r.object(*c, p, {"width", "height", "focal"})) {
      m.camera_ccd.width = r.number(*c, p, "width", 0.0);
      m.camera_ccd.height = r.number(*c, p, "height", 0.0);
      m.camera_ccd.focal = r.number(*c, p, "focal", 0.0);
    }
  }
  if (const json* lv = r.get(j, path, "link_volumes", false); lv && r.array(*lv, child(path, "link_volumes"))) {
    for (std::size_t i = 0; i < lv->size(); ++i) {
      const std::string p = element(child(path, "link_volumes"), i);
      const json& e = (*lv)[i];
      LinkVolume v;
      if (r.object(e, p, {"name", "frame", "volume"})) {
        v.name = r.string(e, p, "name", false);
        if (v.name.empty()) v.name = "volume" + std::to_string(i);
        v.frame = r.integer(e, p, "frame", 0);
        if (const json* vol = r.get(e, p, "volume")) v.volume = r.volume(*vol, child(p, "volume"));
      }
      m.link_volumes.push_back(std::move(v));
    }
  }
  return m;
}

Scene read_scene(Reader& r, const json& j) {
  const std::string path = "scene";
  Scene s;
  if (!r.object(j, path, {"obstacles", "forbidden_areas", "sun", "target"})) return s;
  if (const json* o = r.get(j, path, "obstacles", false); o && r.array(*o, child(path, "obstacles")))
    for (std::size_t i = 0; i < o->size(); ++i)
      s.obstacles.push_back(r.volume((*o)[i], element(child(path, "obstacles"), i)));
  if (const json* f = r.get(j, path, "forbidden_areas", false); f && r.array(*f, child(path, "forbidden_areas")))
    for (std::size_t i = 0; i < f->size(); ++i)
      s.forbidden_areas.push_back(r.forbidden((*f)[i], element(child(path, "forbidden_areas"), i)));
  if (const json* sun = r.get(j, path, "sun")) {
    const std::string p = child(path, "sun");
    if (r.object(*sun, p, {"azimuth", "elevation"})) {
      s.sun.azimuth = r.number(*sun, p, "azimuth", 0.0);
      s.sun.elevation = r.number(*sun, p, "elevation", 0.0);
    }
  }
  if (const json* t = r.get(j, path, "target")) s.target_position = r.vec3(*t, child(path, "target"));
  return s;
}

TaskTrajectory read_task(Reader& r, const json& j) {
  const std::string path = "task";
  TaskTrajectory task;
  if (!r.object(j, path, {"waypoints"})) return task;
  const json* wps = r.get(j, path, "waypoints");
  if (wps == nullptr || !r.array(*wps, child(path, "waypoints"))) return task;
  for (std::size_t i = 0; i < wps->size(); ++i) {
    const std::string p = element(child(path, "waypoints"), i);
    const json& e = (*wps)[i];
    Waypoint w;
    if (r.object(e, p, {"t", "position", "orientation", "fixed_joints"})) {
      w.t = r.number(e, p, "t", 0.0);
      if (const json* pos = r.get(e, p, "position")) w.position = r.vec3(*pos, child(p, "position"));
      if (const json* o = r.get(e, p, "orientation")) w.orientation = r.quat(*o, child(p, "orientation"));
      if (const json* f = r.get(e, p, "fixed_joints", false); f && r.array(*f, child(p, "fixed_joints"))) {
        for (std::size_t k = 0; k < f->size(); ++k) {
          const std::string fp = element(child(p, "fixed_joints"), k);
          FixedJoint fj;
          if (r.object((*f)[k], fp, {"joint", "value"})) {
            fj.arm_joint_index = r.integer((*f)[k], fp, "joint", 0);
            fj.value = r.number((*f)[k], fp, "value", 0.0);
          }
          w.fixed_joints.push_back(fj);
        }
      }
    }
    task.waypoints.push_back(std::move(w));
  }
  return task;
}

PlannerConfig read_config(Reader& r, const json& j) {
  const std::string path = "config";
  PlannerConfig c;
  if (!r.object(j, path, {"grid", "sigma", "ik", "smoothing", "rolling_heading_tol", "snv_weights"})) return c;
  if (const json* g = r.get(j, path, "grid", false)) {
    const std::string p = child(path, "grid");
    if (r.object(*g, p, {"dx", "dy", "dh", "x_range", "y_range", "h_range"})) {
      c.grid.dx = r.number(*g, p, "dx", c.grid.dx, false);
      c.grid.dy = r.number(*g, p, "dy", c.grid.dy, false);
      c.grid.dh = r.number(*g, p, "dh", c.grid.dh, false);
      c.grid.x_range = r.range(*g, p, "x_range");
      c.grid.y_range = r.range(*g, p, "y_range");
      c.grid.h_range = r.range(*g, p, "h_range");
    }
  }
  c.sigma = r.number(j, path, "sigma", c.sigma, false);
  if (const json* ik = r.get(j, path, "ik", false)) {
    const std::string p = child(path, "ik");
    if (r.object(*ik, p, {"residual_tol", "accept_tol", "max_branches", "max_iterations", "seeds_per_joint"})) {
      c.ik.residual_tol = r.number(*ik, p, "residual_tol", c.ik.residual_tol, false);
      c.ik.accept_tol = r.number(*ik, p, "accept_tol", c.ik.accept_tol, false);
      c.ik.max_branches = r.integer(*ik, p, "max_branches", c.ik.max_branches, false);
      c.ik.max_iterations = r.integer(*ik, p, "max_iterations", c.ik.max_iterations, false);
      c.ik.seeds_per_joint = r.integer(*ik, p, "seeds_per_joint", c.ik.seeds_per_joint, false);
    }
  }
  if (const json* s = r.get(j, path, "smoothing", false)) {
    const std::string p = child(path, "smoothing");
    SmoothingConfig& sc = c.smoothing;
    if (r.object(*s, p,
                 {"samples_per_interval", "max_iterations", "max_outer_rounds", "constraint_tol",
                  "initial_penalty"})) {
      sc.samples_per_interval = r.integer(*s, p, "samples_per_interval", sc.samples_per_interval, false);
      sc.max_iterations = r.integer(*s, p, "max_iterations", sc.max_iterations, false);
      sc.max_outer_rounds = r.integer(*s, p, "max_outer_rounds", sc.max_outer_rounds, false);
      sc.constraint_tol = r.number(*s, p, "constraint_tol", sc.constraint_tol, false);
      sc.initial_penalty = r.number(*s, p, "initial_penalty", sc.initial_penalty, false);
    }
  }
  if (const json* h = r.get(j, path, "rolling_heading_tol", false))
    c.rolling_heading_tol = r.number(*h, child(path, "rolling_heading_tol"));
  if (const json* w = r.get(j, path, "snv_weights", false))
    c.snv_weights = r.vector(*w, child(path, "snv_weights"));
  return c;
}

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError({std::string("document: ") + e.what()});
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  out.flush();
  if (!out) throw IoError("failed writing " + path.string());
}

void check_format(Reader& r, const json& doc, const char* expected) {
  const std::string format = r.string(doc, "", "format");
  if (!format.empty() && format != expected)
    r.fail("format", "expected '" + std::string(expected) + "', got '" + format + "'");
}

// ---------------------------------------------------------------- writers

json to_json(const VecX& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

json to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }
json to_json(const Vec2& v) { return json::array({v.x(), v.y()}); }
json to_json(const Quat& q) { return json::array({q.w(), q.x(), q.y(), q.z()}); }

json to_json(const Transform3d& t) {
  return {{"translation", to_json(t.translation)}, {"rotation", to_json(t.rotation)}};
}

json to_json(const ConvexVolume& volume) {
  if (const auto* b = std::get_if<Box>(&volume))
    return {{"type", "box"}, {"half_extents", to_json(b->half_extents)}, {"pose", to_json(b->pose)}};
  if (const auto* c = std::get_if<Capsule>(&volume))
    return {{"type", "capsule"}, {"radius", c->radius}, {"a", to_json(c->a)}, {"b", to_json(c->b)}};
  const auto& h = std::get<ConvexHull>(volume);
  json vertices = json::array();
  for (const Vec3& v : h.vertices) vertices.push_back(to_json(v));
  return {{"type", "hull"}, {"vertices", vertices}, {"pose", to_json(h.pose)}};
}

json to_json(const ForbiddenArea& area) {
  if (const auto* p = std::get_if<Polygon>(&area)) {
    json vertices = json::array();
    for (const Vec2& v : p->vertices) vertices.push_back(to_json(v));
    return {{"type", "polygon"}, {"vertices", vertices}};
  }
  const auto& g = std::get<OccupancyGrid>(area);
  json cells = json::array();
  for (std::uint8_t c : g.cells) cells.push_back(static_cast<int>(c));
  return {{"type", "grid"},          {"origin", to_json(g.origin)}, {"resolution", g.resolution},
          {"width", g.width},       {"height", g.height},          {"cells", cells}};
}

json to_json(const RobotModel& m) {
  json joints = json::array();
  for (const ArmJoint& a : m.arm_joints)
    joints.push_back({{"name", a.name},
                      {"axis", to_json(a.axis)},
                      {"origin", to_json(a.origin)},
                      {"pos_min", a.pos_min},
                      {"pos_max", a.pos_max},
                      {"vel_max", a.vel_max},
                      {"acc_max", a.acc_max}});
  json volumes = json::array();
  for (const LinkVolume& v : m.link_volumes)
    volumes.push_back({{"name", v.name}, {"frame", v.frame}, {"volume", to_json(v.volume)}});
  return {{"base_limits", {{"v_max", m.base_limits.v_max}, {"omega_max", m.base_limits.omega_max}}},
          {"arm_joints", joints},
          {"arm_mount_transform", to_json(m.arm_mount_transform)},
          {"tool_transform", to_json(m.tool_transform)},
          {"link_volumes", volumes},
          {"camera_transform", to_json(m.camera_transform)},
          {"camera_ccd",
           {{"width", m.camera_ccd.width}, {"height", m.camera_ccd.height}, {"focal", m.camera_ccd.focal}}}};
}

json to_json(const Scene& s) {
  json obstacles = json::array();
  for (const ConvexVolume& v : s.obstacles) obstacles.push_back(to_json(v));
  json areas = json::array();
  for (const ForbiddenArea& a : s.forbidden_areas) areas.push_back(to_json(a));
  return {{"obstacles", obstacles},
          {"forbidden_areas", areas},
          {"sun", {{"azimuth", s.sun.azimuth}, {"elevation", s.sun.elevation}}},
          {"target", to_json(s.target_position)}};
}

json to_json(const TaskTrajectory& task) {
  json wps = json::array();
  for (const Waypoint& w : task.waypoints) {
    json fixed = json::array();
    for (const FixedJoint& f : w.fixed_joints) fixed.push_back({{"joint", f.arm_joint_index}, {"value", f.value}});
    wps.push_back(
        {{"t", w.t}, {"position", to_json(w.position)}, {"orientation", to_json(w.orientation)}, {"fixed_joints", fixed}});
  }
  return {{"waypoints", wps}};
}

json to_json(const PlannerConfig& c) {
  json grid = {{"dx", c.grid.dx}, {"dy", c.grid.dy}, {"dh", c.grid.dh}};
  if (c.grid.x_range) grid["x_range"] = {c.grid.x_range->lo, c.grid.x_range->hi};
  if (c.grid.y_range) grid["y_range"] = {c.grid.y_range->lo, c.grid.y_range->hi};
  if (c.grid.h_range) grid["h_range"] = {c.grid.h_range->lo, c.grid.h_range->hi};
  json out = {{"grid", grid},
              {"sigma", c.sigma},
              {"ik",
               {{"residual_tol", c.ik.residual_tol},
                {"accept_tol", c.ik.accept_tol},
                {"max_branches", c.ik.max_branches},
                {"max_iterations", c.ik.max_iterations},
                {"seeds_per_joint", c.ik.seeds_per_joint}}},
              {"smoothing",
               {{"samples_per_interval", c.smoothing.samples_per_interval},
                {"max_iterations", c.smoothing.max_iterations},
                {"max_outer_rounds", c.smoothing.max_outer_rounds},
                {"constraint_tol", c.smoothing.constraint_tol},
                {"initial_penalty", c.smoothing.initial_penalty}}}};
  if (c.rolling_heading_tol) out["rolling_heading_tol"] = *c.rolling_heading_tol;
  if (c.snv_weights) out["snv_weights"] = to_json(*c.snv_weights);
  return out;
}

json to_json(const CostBreakdown& c) { return {{"total", c.total}, {"tv", c.tv}, {"snv", c.snv}}; }

CostBreakdown read_cost(Reader& r, const json& j, const std::string& path) {
  CostBreakdown c;
  if (!r.object(j, path, {"total", "tv", "snv"})) return c;
  c.total = r.number(j, path, "total", 0.0);
  c.tv = r.number(j, path, "tv", 0.0);
  c.snv = r.number(j, path, "snv", 0.0);
  return c;
}

const char* phase_name(BasePhase::Kind kind) {
  switch (kind) {
    case BasePhase::Kind::kRotate:
      return "rotate";
    case BasePhase::Kind::kTranslate:
      return "translate";
    default:
      return "hold";
  }
}

json rows(const std::vector<VecX>& values) {
  json out = json::array();
  for (const VecX& v : values) out.push_back(to_json(v));
  return out;
}

std::vector<VecX> read_rows(Reader& r, const json& j, const std::string& path, std::size_t width) {
  std::vector<VecX> out;
  if (!r.array(j, path)) return out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(r.vector(j[i], element(path, i), width));
  return out;
}

std::vector<double> read_doubles(Reader& r, const json& j, const std::string& path) {
  const VecX v = r.vector(j, path);
  return {v.data(), v.data() + v.size()};
}

void fill_samples(Plan& plan) {
  const JointTrajectory traj = plan.trajectory();
  plan.sample_times = export_times(traj.start_time(), traj.end_time(), plan.sample_rate);
  plan.samples.clear();
  plan.sample_rates.clear();
  for (double t : plan.sample_times) {
    if (plan.spline) {
      const TrajectorySample s = eval_trajectory(*plan.spline, t);
      plan.samples.push_back(s.q.stacked());
      plan.sample_rates.push_back(s.q_dot.stacked());
    } else {
      auto [q, v] = sample_discrete(*plan.discrete, t);
      plan.samples.push_back(std::move(q));
      plan.sample_rates.push_back(std::move(v));
    }
  }
}

std::pair<VecX, VecX> sample_stacked(const JointTrajectory& traj, double t) {
  if (const auto* spline = std::get_if<SplineTrajectory>(&traj.representation)) {
    const TrajectorySample s = eval_trajectory(*spline, t);
    return {s.q.stacked(), s.q_dot.stacked()};
  }
  return sample_discrete(std::get<DiscreteTrajectory>(traj.representation), t);
}

std::string number_text(double v) {
  std::ostringstream out;
  out << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
  return out.str();
}

}  // namespace

ParseError::ParseError(std::vector<std::string> errors)
    : std::runtime_error("invalid document: " + join(errors)), errors_(std::move(errors)) {}

Problem parse_problem(const std::string& text) {
  const json doc = parse_json(text);
  Reader r;
  Problem p;
  if (!r.object(doc, "document", {"format", "robot", "scene", "task", "config"})) throw ParseError(r.errors);
  check_format(r, doc, kSceneFormat);
  if (const json* j = r.get(doc, "", "robot")) p.model = read_robot(r, *j);
  if (const json* j = r.get(doc, "", "scene")) p.scene = read_scene(r, *j);
  if (const json* j = r.get(doc, "", "task")) p.task = read_task(r, *j);
  if (const json* j = r.get(doc, "", "config", false)) p.config = read_config(r, *j);
  if (!r.errors.empty()) throw ParseError(r.errors);

  std::vector<std::string> issues;
  for (const std::string& v : validate_model(p.model)) issues.push_back("robot." + v);
  for (const std::string& v : validate_scene(p.scene, p.task, &p.model)) issues.push_back(v);
  for (const std::string& v : validate_config(p.config)) issues.push_back(v);
  if (p.config.snv_weights && p.config.snv_weights->size() != p.model.total_dof())
    issues.emplace_back("config.snv_weights: need one weight per joint");
  if (!issues.empty()) throw ParseError(issues);
  return p;
}

Problem load_problem(const std::filesystem::path& path) {
  try {
    return parse_problem(read_file(path));
  } catch (const ParseError& e) {
    std::vector<std::string> errors;
    for (const std::string& s : e.errors()) errors.push_back(path.string() + ": " + s);
    throw ParseError(errors);
  }
}

std::string serialize_problem(const Problem& p) {
  const json doc = {{"format", kSceneFormat},
                    {"robot", to_json(p.model)},
                    {"scene", to_json(p.scene)},
                    {"task", to_json(p.task)},
                    {"config", to_json(p.config)}};
  return doc.dump(2) + "\n";
}

void save_problem(const std::filesystem::path& path, const Problem& problem) {
  write_file(path, serialize_problem(problem));
}

JointTrajectory Plan::trajectory() const {
  JointTrajectory traj;
  if (spline) {
    traj.representation = *spline;
  } else if (discrete) {
    traj.representation = *discrete;
  } else {
    throw std::logic_error("plan has no trajectory");
  }
  traj.cost_report = cost;
  return traj;
}

std::vector<double> export_times(double t0, double t1, double rate) {
  if (!(rate > 0.0)) throw std::invalid_argument("sample rate must be positive");
  if (!(t1 >= t0)) throw std::invalid_argument("export interval is empty");
  const long count = static_cast<long>(std::floor((t1 - t0) * rate + 1e-9));
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(count) + 1);
  for (long k = 0; k <= count; ++k) out.push_back(std::min(t0 + static_cast<double>(k) / rate, t1));
  return out;
}

std::pair<VecX, VecX> sample_discrete(const DiscreteTrajectory& traj, double t) {
  const auto& times = traj.times;
  if (times.empty()) throw std::invalid_argument("empty discrete trajectory");
  if (!(t >= times.front() - 1e-12 && t <= times.back() + 1e-12))
    throw std::invalid_argument("trajectory time " + std::to_string(t) + " outside the plan");
  const VecX first = traj.configs.front().stacked();
  if (times.size() == 1) return {first, VecX::Zero(first.size())};
  const std::size_t i = std::min<std::size_t>(
      static_cast<std::size_t>(std::upper_bound(times.begin(), times.end(), t) - times.begin()), times.size() - 1);
  const std::size_t lo = i - 1;
  const double dt = times[i] - times[lo];
  const JointConfig& a = traj.configs[lo];
  const JointConfig& b = traj.configs[i];
  VecX delta = b.stacked() - a.stacked();
  delta[2] = angle_difference(b.base.h, a.base.h);
  const double s = std::clamp((t - times[lo]) / dt, 0.0, 1.0);
  VecX q = a.stacked() + s * delta;
  q[2] = normalize_angle(q[2]);
  return {q, delta / dt};
}

Plan make_plan(const DPSolution& dp, double sample_rate) {
  Plan plan;
  plan.discrete = dp.trajectory;
  plan.discrete_cost = dp.cost;
  plan.cost = dp.cost;
  plan.sample_rate = sample_rate;
  plan.stats["dp.nodes_expanded"] = static_cast<double>(dp.stats.nodes_expanded);
  plan.stats["dp.edges_evaluated"] = static_cast<double>(dp.stats.edges_evaluated);
  plan.stats["dp.edges_feasible"] = static_cast<double>(dp.stats.edges_feasible);
  fill_samples(plan);
  return plan;
}

Plan make_plan(const SmoothingResult& result, double sample_rate, const DPSolution* dp) {
  Plan plan = dp ? make_plan(*dp, sample_rate) : Plan{};
  plan.sample_rate = sample_rate;
  plan.spline = std::get<SplineTrajectory>(result.trajectory.representation);
  plan.seed_cost = result.seed_cost;
  plan.cost = result.cost;
  const SmoothingStats& s = result.stats;
  plan.stats["smoothing.iterations"] = s.iterations;
  plan.stats["smoothing.evaluations"] = s.evaluations;
  plan.stats["smoothing.rounds"] = s.rounds;
  plan.stats["smoothing.converged"] = s.converged ? 1.0 : 0.0;
  plan.stats["smoothing.seed_violations"] = s.seed_violations;
  plan.stats["smoothing.max_violation"] = s.max_violation;
  plan.stats["smoothing.max_task_deviation"] = s.max_task_deviation;
  fill_samples(plan);
  return plan;
}

std::string serialize_plan(const Plan& plan) {
  json doc = {{"format", kPlanFormat}, {"problem_format", plan.problem_format}};
  if (plan.discrete) {
    std::vector<VecX> configs;
    for (const JointConfig& q : plan.discrete->configs) configs.push_back(q.stacked());
    doc["discrete_trajectory"] = {{"times", plan.discrete->times}, {"configs", rows(configs)}};
    if (plan.discrete_cost) doc["discrete_trajectory"]["costs"] = to_json(*plan.discrete_cost);
  }
  if (plan.spline) {
    const auto& arm = plan.spline->arm;
    std::vector<VecX> control;
    for (Eigen::Index c = 0; c < arm.control_points().cols(); ++c) control.push_back(arm.control_points().col(c));
    doc["spline"] = {{"knots", arm.knots()}, {"control_points", rows(control)}};
    const BaseProfile& base = plan.spline->base;
    std::vector<VecX> knots;
    for (const BasePose& k : base.knots()) knots.push_back(Vec3(k.x, k.y, k.h));
    json phases = json::array();
    for (const BasePhase& ph : base.phases())
      phases.push_back({{"kind", phase_name(ph.kind)}, {"interval", ph.interval}, {"t0", ph.t0}, {"t1", ph.t1}});
    doc["base_profile"] = {{"times", base.times()},
                           {"knots", rows(knots)},
                           {"v_max", base.limits().v_max},
                           {"omega_max", base.limits().omega_max},
                           {"phases", phases}};
    if (plan.seed_cost) doc["spline"]["seed_costs"] = to_json(*plan.seed_cost);
  }
  doc["costs"] = to_json(plan.cost);
  doc["stats"] = plan.stats;
  doc["sampled_trajectory"] = {{"sample_rate", plan.sample_rate},
                               {"times", plan.sample_times},
                               {"q", rows(plan.samples)},
                               {"q_dot", rows(plan.sample_rates)}};
  return doc.dump(2) + "\n";
}

Plan parse_plan(const std::string& text) {
  const json doc = parse_json(text);
  Reader r;
  Plan plan;
  if (!r.object(doc, "document",
                {"format", "problem_format", "discrete_trajectory", "spline", "base_profile", "costs", "stats",
                 "sampled_trajectory"}))
    throw ParseError(r.errors);
  check_format(r, doc, kPlanFormat);
  plan.problem_format = r.string(doc, "", "problem_format");
  if (const json* d = r.get(doc, "", "discrete_trajectory", false)) {
    const std::string p = "discrete_trajectory";
    if (r.object(*d, p, {"times", "configs", "costs"})) {
      DiscreteTrajectory traj;
      if (const json* t = r.get(*d, p, "times")) traj.times = read_doubles(r, *t, child(p, "times"));
      if (const json* c = r.get(*d, p, "configs"))
        for (const VecX& q : read_rows(r, *c, child(p, "configs"), 0)) {
          if (q.size() < 4) {
            r.fail(child(p, "configs"), "each configuration needs x, y, h and arm joints");
            break;
          }
          traj.configs.emplace_back(BasePose{q[0], q[1], q[2]}, VecX(q.tail(q.size() - 3)));
        }
      if (traj.times.size() != traj.configs.size()) r.fail(p, "times and configs differ in length");
      if (const json* c = r.get(*d, p, "costs", false)) plan.discrete_cost = read_cost(r, *c, child(p, "costs"));
      plan.discrete = std::move(traj);
    }
  }
  const json* spline = r.get(doc, "", "spline", false);
  const json* base = r.get(doc, "", "base_profile", false);
  if ((spline == nullptr) != (base == nullptr)) r.fail("spline", "spline and base_profile must appear together");
  std::vector<double> base_times;
  std::vector<BasePose> base_knots;
  BaseLimits base_limits;
  if (spline && base && r.object(*spline, "spline", {"knots", "control_points", "seed_costs"}) &&
      r.object(*base, "base_profile", {"times", "knots", "v_max", "omega_max", "phases"})) {
    base_limits.v_max = r.number(*base, "base_profile", "v_max", 0.0);
    base_limits.omega_max = r.number(*base, "base_profile", "omega_max", 0.0);
    std::vector<double> knots;
    std::vector<VecX> control;
    if (const json* k = r.get(*spline, "spline", "knots")) knots = read_doubles(r, *k, "spline.knots");
    if (const json* c = r.get(*spline, "spline", "control_points")) control = read_rows(r, *c, "spline.control_points", 0);
    if (const json* c = r.get(*spline, "spline", "seed_costs", false))
      plan.seed_cost = read_cost(r, *c, "spline.seed_costs");
    if (const json* t = r.get(*base, "base_profile", "times")) base_times = read_doubles(r, *t, "base_profile.times");
    if (const json* k = r.get(*base, "base_profile", "knots"))
      for (const VecX& v : read_rows(r, *k, "base_profile.knots", 3)) base_knots.push_back({v[0], v[1], v[2]});
    if (r.errors.empty()) {
      if (control.empty()) {
        r.fail("spline.control_points", "must not be empty");
      } else {
        MatX points(control.front().size(), static_cast<Eigen::Index>(control.size()));
        for (std::size_t c = 0; c < control.size(); ++c) {
          if (control[c].size() != points.rows()) {
            r.fail(element("spline.control_points", c), "inconsistent dimension");
            break;
          }
          points.col(static_cast<Eigen::Index>(c)) = control[c];
        }
        try {
          SplineTrajectory st;
          st.arm = ClampedCubicBSpline<double>(knots, points);
          plan.spline = std::move(st);
        } catch (const std::invalid_argument& e) {
          r.fail("spline", e.what());
        }
      }
    }
  }
  if (const json* c = r.get(doc, "", "costs")) plan.cost = read_cost(r, *c, "costs");
  if (const json* s = r.get(doc, "", "stats", false)) {
    if (!s->is_object()) {
      r.fail("stats", "expected an object");
    } else {
      for (const auto& [key, value] : s->items()) plan.stats[key] = r.number(value, child("stats", key));
    }
  }
  if (const json* s = r.get(doc, "", "sampled_trajectory")) {
    const std::string p = "sampled_trajectory";
    if (r.object(*s, p, {"sample_rate", "times", "q", "q_dot"})) {
      plan.sample_rate = r.number(*s, p, "sample_rate", plan.sample_rate);
      if (const json* t = r.get(*s, p, "times")) plan.sample_times = read_doubles(r, *t, child(p, "times"));
      if (const json* q = r.get(*s, p, "q")) plan.samples = read_rows(r, *q, child(p, "q"), 0);
      if (const json* v = r.get(*s, p, "q_dot")) plan.sample_rates = read_rows(r, *v, child(p, "q_dot"), 0);
    }
  }
  if (!plan.discrete && !plan.spline && r.errors.empty())
    r.fail("document", "plan has neither discrete_trajectory nor spline");
  if (!r.errors.empty()) throw ParseError(r.errors);
  if (plan.spline) {
    try {
      plan.spline->base = BaseProfile::build(base_times, base_knots, base_limits);
    } catch (const std::invalid_argument& e) {
      throw ParseError({std::string("base_profile: ") + e.what()});
    }
  }
  return plan;
}

void save_plan(const std::filesystem::path& path, const Plan& plan) { write_file(path, serialize_plan(plan)); }

void save_plan(const std::filesystem::path& path, const DPSolution& dp, double sample_rate) {
  save_plan(path, make_plan(dp, sample_rate));
}

void save_plan(const std::filesystem::path& path, const SmoothingResult& result, double sample_rate,
               const DPSolution* dp) {
  save_plan(path, make_plan(result, sample_rate, dp));
}

Plan load_plan(const std::filesystem::path& path) {
  try {
    return parse_plan(read_file(path));
  } catch (const ParseError& e) {
    std::vector<std::string> errors;
    for (const std::string& s : e.errors()) errors.push_back(path.string() + ": " + s);
    throw ParseError(errors);
  }
}

void export_traces(const std::filesystem::path& path, const JointTrajectory& traj, const Scene& scene,
                   const RobotModel& model, double sample_rate, const VecX* snv_weights) {
  std::ostringstream out;
  out << "t";
  for (const ArmJoint& j : model.arm_joints) out << "," << j.name;
  out << ",x,y,h,u,v,tv,snv\n";
  for (double t : export_times(traj.start_time(), traj.end_time(), sample_rate)) {
    const auto [q, v] = sample_stacked(traj, t);
    const BasePose base{q[0], q[1], q[2]};
    out << number_text(t);
    for (Eigen::Index k = 3; k < q.size(); ++k) out << "," << number_text(q[k]);
    out << "," << number_text(q[0]) << "," << number_text(q[1]) << "," << number_text(q[2]);
    if (const auto image = project_target(model, base, scene.target_position))
      out << "," << number_text(image->u) << "," << number_text(image->v);
    else
      out << ",,";
    out << "," << number_text(tv_cost(model, base, scene.target_position)) << ","
        << number_text(snv_cost(v, snv_weights)) << "\n";
  }
  write_file(path, out.str());
}

}  // namespace optiwb
