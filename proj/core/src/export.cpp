#include <kplateau/export.hpp>

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace kp {

namespace {

void append_real(std::string& out, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  out += buf;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::string format_obj(const TriMesh& mesh) {
  std::string out = "# kplateau film mesh\n";
  for (const Vec3& v : mesh.vertices) {
    out += "v";
    for (int k = 0; k < 3; ++k) {
      out += ' ';
      append_real(out, v[k]);
    }
    out += '\n';
  }
  for (const Triangle& t : mesh.triangles) {
    out += "f " + std::to_string(t[0] + 1) + " " + std::to_string(t[1] + 1) + " " + std::to_string(t[2] + 1) + "\n";
  }
  return out;
}

void export_mesh(const TriMesh& mesh, const std::string& path) { write_text_file(path, format_obj(mesh)); }

TriMesh parse_obj(std::string_view text) {
  TriMesh mesh;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  auto bad = [&](const std::string& why) {
    throw Error(ErrorKind::Io, "OBJ line " + std::to_string(line_no) + ": " + why);
  };
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;
    if (tag == "v") {
      std::string tok[3];
      Vec3 p;
      if (!(ls >> tok[0] >> tok[1] >> tok[2])) bad("vertex needs three coordinates");
      for (int k = 0; k < 3; ++k) {
        const auto [end, ec] = std::from_chars(tok[k].data(), tok[k].data() + tok[k].size(), p[k]);
        if (ec != std::errc() || end != tok[k].data() + tok[k].size()) bad("bad coordinate '" + tok[k] + "'");
      }
      mesh.vertices.push_back(p);
    } else if (tag == "f") {
      Triangle t;
      std::string tok;
      int count = 0;
      while (ls >> tok) {
        if (count == 3) bad("only triangular faces are supported");
        int idx = 0;
        const auto slash = tok.find('/');
        const std::string head = tok.substr(0, slash);
        const auto [end, ec] = std::from_chars(head.data(), head.data() + head.size(), idx);
        if (ec != std::errc() || end != head.data() + head.size() || idx == 0) bad("bad face index '" + tok + "'");
        t[count++] = idx > 0 ? idx - 1 : static_cast<int>(mesh.vertices.size()) + idx;
      }
      if (count != 3) bad("face needs three indices");
      mesh.triangles.push_back(t);
    }
  }
  mesh.validate();
  return mesh;
}

TriMesh read_obj(const std::string& path) { return parse_obj(read_text_file(path)); }

std::string format_trace_csv(const SolveTrace& trace) {
  std::string out(kTraceHeader);
  out += '\n';
  for (const TraceRow& row : trace.rows) {
    out += std::to_string(row.iter);
    const EnergyReport& e = row.energy;
    for (double x : {e.e_el1, e.e_el2, e.e_g1, e.e_g2, e.e_film, e.e_total, row.penalties.total()}) {
      out += ',';
      append_real(out, x);
    }
    out += ',' + std::to_string(row.invariants.lk12) + ',' + std::to_string(row.invariants.n1) + ',' +
           std::to_string(row.invariants.n2);
    for (double x : {row.area, row.hausdorff_step}) {
      out += ',';
      append_real(out, x);
    }
    out += '\n';
  }
  return out;
}

void export_trace(const SolveTrace& trace, const std::string& path) { write_text_file(path, format_trace_csv(trace)); }

void write_text_file(const std::string& path, std::string_view text) {
  const std::filesystem::path p(path);
  std::error_code ec;
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path(), ec);
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write '" + path + "'");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(ErrorKind::Io, "write failed for '" + path + "'");
}

}  // namespace kp
