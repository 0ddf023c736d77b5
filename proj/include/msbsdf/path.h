// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <vector>

#include "msbsdf/geometry.h"
#include "msbsdf/material.h"
#include "msbsdf/random.h"
#include "msbsdf/rgb.h"

namespace msbsdf {

enum class Branch : unsigned char { Reflect, Refract };

/// Medium a direction travels in: above (Upper) or below (Lower) the macro
/// surface. Conductors only have an Upper side.
enum class Side : unsigned char { Upper, Lower };

inline Side flip(Side s) { return s == Side::Upper ? Side::Lower : Side::Upper; }

/// Maps a direction into the frame of the given side, in which the
/// microsurface faces +z. The map is its own inverse, so it is used both ways.
inline Direction side_frame(const Direction& v, Side s) {
    return s == Side::Upper ? v : Direction{v.x, v.y, -v.z};
}

/// Denominator convention of the vertex term.
enum class VertexMode {
    /// |cos| against the micronormal, as in the single-facet formula.
    Literal,
    /// |cos| against the macro normal, with a matching |cos| weight on each
    /// interior direction of the path.
    CancellationConsistent,
};

struct EvalConventions {
    VertexMode mode = VertexMode::CancellationConsistent;
    int max_bounces = 10;
};

/// Position-free light path d_0..d_k in flow convention (d_0 = -omega_i,
/// d_k = omega_o) with one branch tag per vertex.
struct LightPath {
    std::vector<Direction> dirs;
    std::vector<Branch> branches;

    LightPath() = default;
    /// All-reflection path.
    explicit LightPath(std::vector<Direction> d);
    LightPath(std::vector<Direction> d, std::vector<Branch> b);

    /// Number of vertices k.
    int bounces() const { return static_cast<int>(dirs.size()) - 1; }
    bool operator==(const LightPath&) const = default;
};

/// (-d_k, ..., -d_0) with the branch tags reversed.
LightPath reverse(const LightPath& path);

/// Side of the medium that light arriving along -omega_i comes from.
Side entry_side(const Direction& omega_i, const MaterialSpec& mat);

/// Medium of each direction d_0..d_k.
std::vector<Side> path_sides(const LightPath& path, const MaterialSpec& mat);

/// Fresnel/NDF/Jacobian factor of one vertex (everything but occlusion).
/// `side` is the medium of d_in.
Rgb vertex_term(const Direction& d_in, const Direction& d_out, const MaterialSpec& mat,
                const EvalConventions& conv, Side side = Side::Upper,
                Branch branch = Branch::Reflect);

/// Probability that d_i leaves the previous vertex without being blocked
/// (interior) or escapes the surface (last index).
double exit_probability(const LightPath& path, int i, const MaterialSpec& mat);

/// Masking of d_i towards vertex i, G1(-d_i, h_i); 1 for the last index.
double entry_masking(const LightPath& path, int i, const MaterialSpec& mat);

/// exit_probability * entry_masking, evaluated without forming the
/// unbounded downward G1 explicitly.
double segment_term(const LightPath& path, int i, const MaterialSpec& mat);

/// f(path): alternating product of segment and vertex terms. In
/// CancellationConsistent mode every interior direction carries an extra
/// |cos theta| (projected solid angle measure).
Rgb path_contribution(const LightPath& path, const MaterialSpec& mat, const EvalConventions& conv);

/// Density of d_1..d_{k-1} under the forward walk, including Fresnel branch
/// choices and the continue decisions taken at d_1..d_{k-1}.
double path_pdf_forward(const LightPath& path, const MaterialSpec& mat, const EvalConventions& conv);

/// Density of the walk step d_in -> d_out (solid angle of d_out), including
/// the Fresnel branch probability for dielectrics.
double direction_pdf(const Direction& d_in, const Direction& d_out, Side side, Branch branch,
                     const MaterialSpec& mat);

/// Probability that the walk continues after emitting d into `side`:
/// 1 - G1 when d points away from the surface, 1 otherwise.
double continue_probability(const Direction& d, Side side, const MaterialSpec& mat);

struct DirectionSample {
    Direction d;
    Branch branch = Branch::Reflect;
    Side side = Side::Upper;  ///< medium of d
    Direction micronormal;    ///< in the frame of the incoming side
    double pdf = 0;           ///< direction_pdf of the step
    /// Closed-form ratio of (entry masking * vertex term * |cos d|) over
    /// (pdf * g1_dist) in CancellationConsistent mode: F for conductors,
    /// exactly 1 for dielectrics.
    Rgb weight{1.0};
    /// Undeviated crossing of an index-matched dielectric; pdf is a delta.
    bool delta = false;
};

/// One walk step: VNDF micronormal, then a Fresnel branch choice for
/// dielectrics. Empty when no microsurface is visible from d_in.
std::optional<DirectionSample> sample_direction(const Direction& d_in, Side side,
                                                const MaterialSpec& mat, RandomStream& rs);

/// g1_dist of -d in the frame of `side`: the masking of the next vertex seen
/// along d, without the local Heaviside factor.
double incoming_masking(const Direction& d, Side side, const MaterialSpec& mat);

}  // namespace msbsdf
