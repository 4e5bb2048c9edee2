#pragma once

#include <string>
#include <vector>

#include "evflow/scene_sim.hpp"
#include "evflow/train.hpp"
#include "evflow/types.hpp"
#include "evflow/uq.hpp"
#include "evflow/veckm.hpp"

namespace evflow {

// ---- event files -----------------------------------------------------------
// Binary: magic "EVT1", u64 LE count, then per event f64 t, f32 x, f32 y,
// i8 polarity. CSV alternative: header `t,x,y,p`.

void write_events_evt1(const std::string& path, const EventCloud& cloud);
EventCloud read_events_evt1(const std::string& path);
void write_events_csv(const std::string& path, const EventCloud& cloud);
EventCloud read_events_csv(const std::string& path);
/// Dispatch on the EVT1 magic, falling back to CSV.
EventCloud read_events_auto(const std::string& path);

// ---- flow / ground-truth CSV ----------------------------------------------

struct FlowRows {
    std::vector<double> t;
    std::vector<Vec2> xy;
    std::vector<Vec2> u;
};

/// Per-event flow file: header `t,x,y,ux,uy`, normalized pixels/second.
void write_flow_csv(const std::string& path, const EventCloud& cloud,
                    const std::vector<Vec2>& flows);
FlowRows read_flow_csv(const std::string& path);

/// Simulator sidecar: header `t,x,y,ux,uy,nx,ny,Z`.
void write_gt_csv(const std::string& path, const SimResult& sim);

struct GtRows {
    std::vector<double> t;
    std::vector<Vec2> xy;
    std::vector<Vec2> u;
    std::vector<Vec2> n;
    std::vector<double> z;
};
GtRows read_gt_csv(const std::string& path);

// ---- camera / scene / imu ---------------------------------------------------

/// Plain-text `key=value` lines: fx fy cx cy k1 k2 k3 p1 p2 width height.
CameraModel read_camera_file(const std::string& path);
void write_camera_file(const std::string& path, const CameraModel& cam);

/// One edge per line: `x0 y0 x1 y1 depth density`. '#' starts a comment.
std::vector<SceneEdge> read_scene_file(const std::string& path);

struct ImuSamples {
    std::vector<double> t;
    std::vector<Vec3> w;
};
/// CSV header `t,wx,wy,wz` (rad/s).
ImuSamples read_imu_csv(const std::string& path);
void write_imu_csv(const std::string& path, const ImuSamples& samples);

/// Time-weighted mean angular velocity over [t0, t1] (piecewise-linear
/// interpolation, constant extrapolation beyond the sampled range).
Vec3 imu_window_mean(const ImuSamples& samples, double t0, double t1);

// ---- predictions -------------------------------------------------------------

/// Header `t,x,y,nx,ny,sigma,valid`.
void write_predictions_csv(const std::string& path, const EventCloud& cloud,
                           const std::vector<NormalFlowPrediction>& preds);

struct PredictionRows {
    std::vector<double> t;
    std::vector<Vec2> xy;
    std::vector<Vec2> n;
    std::vector<double> sigma;
    std::vector<bool> valid;
};
PredictionRows read_predictions_csv(const std::string& path);

// ---- egomotion output ---------------------------------------------------------

struct EgoRow {
    double t_start = 0.0;
    double t_end = 0.0;
    Vec3 v = Vec3::Zero();
    double inlier_fraction = 0.0;
};
/// Header `t_start,t_end,vx,vy,vz,inlier_fraction`.
void write_egomotion_csv(const std::string& path, const std::vector<EgoRow>& rows);
std::vector<EgoRow> read_egomotion_csv(const std::string& path);

// ---- model file ----------------------------------------------------------------
// Magic "NFM1", u32 d, u64 projection seed, u32 layer count, then per layer
// u32 rows, u32 cols, f32 weights row-major, f32 biases. Little-endian.

void write_model(const std::string& path, const TrainedModel& model);
TrainedModel read_model(const std::string& path);

// ---- encoding dump ---------------------------------------------------------------
// Magic "VKM1", u64 N, u32 d, then N*d*2 f32 (real, imag interleaved).

void write_encoding_vkm1(const std::string& path, const Encoding& enc);
Encoding read_encoding_vkm1(const std::string& path);

} // namespace evflow
