#ifndef UMC_UMC_HPP
#define UMC_UMC_HPP

// Error-controlled multi-component compression for fields on unstructured
// meshes: build a rectilinear grid over the mesh, compress the grid
// approximation and the per-vertex residuals independently, reconstruct
// within a provable pointwise bound.

#include "umc/codec.hpp"
#include "umc/common.hpp"
#include "umc/datagen.hpp"
#include "umc/grid.hpp"
#include "umc/grid_builder.hpp"
#include "umc/interp.hpp"
#include "umc/lossless.hpp"
#include "umc/mesh.hpp"
#include "umc/metrics.hpp"
#include "umc/pipeline.hpp"
#include "umc/serialize.hpp"

#endif  // UMC_UMC_HPP
