#pragma once

#include <kplateau/mesh.hpp>
#include <kplateau/solver.hpp>

#include <string>
#include <string_view>

namespace kp {

/// OBJ text: a comment header, `v x y z` lines with 17 significant digits, then 1-based
/// `f i j k` lines. An empty mesh gives the header alone.
std::string format_obj(const TriMesh& mesh);
void export_mesh(const TriMesh& mesh, const std::string& path);

/// Reads `v` and triangular `f` lines (also `f a/b/c` forms); other lines are ignored.
/// Attachments are not stored in OBJ, so the result has none.
TriMesh parse_obj(std::string_view text);
TriMesh read_obj(const std::string& path);

/// Column order of export_trace.
inline constexpr std::string_view kTraceHeader =
    "iter,e_el1,e_el2,e_g1,e_g2,e_film,e_total,penalties,lk12,n1,n2,area,hausdorff_step";

std::string format_trace_csv(const SolveTrace& trace);
void export_trace(const SolveTrace& trace, const std::string& path);

/// Writes text to path, creating parent directories; Io error on failure.
void write_text_file(const std::string& path, std::string_view text);

}  // namespace kp
