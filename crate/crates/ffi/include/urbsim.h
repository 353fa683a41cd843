#ifndef URBSIM_H
#define URBSIM_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum UrbsimStatus {
  URBSIM_STATUS_OK = 0,
  URBSIM_STATUS_NULL_POINTER = 1,
  URBSIM_STATUS_INVALID_UTF8 = 2,
  // The config was rejected.
  URBSIM_STATUS_CONFIG = 3,
  // The network could not be built or loaded.
  URBSIM_STATUS_BUILD = 4,
  // A command was malformed or named something that does not exist.
  URBSIM_STATUS_COMMAND = 5,
  URBSIM_STATUS_PANIC = 6,
} UrbsimStatus;

// Opaque simulation handle.
typedef struct UrbsimSim UrbsimSim;

// Counters readable through [`urbsim_sim_stats`].
typedef struct UrbsimStats {
  uint64_t tick;
  // Tick at which the configured duration is reached.
  uint64_t end_tick;
  uint64_t in_network;
  uint64_t queued;
  uint64_t spawned;
  uint64_t arrived;
  uint64_t exited;
  uint64_t stranded;
  uint64_t hash;
} UrbsimStats;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. Valid until the
// next failing call on the same thread.
const char *urbsim_last_error(void);

// Build a simulation from a JSON scenario config. Relative network paths
// resolve against the working directory.
//
// # Safety
// `config_json` must be a NUL-terminated string and `out` writable.
enum UrbsimStatus urbsim_sim_new(const char *config_json, struct UrbsimSim **out);

// Release a handle. Null is ignored.
//
// # Safety
// `sim` must come from [`urbsim_sim_new`] and not be used afterwards.
void urbsim_sim_free(struct UrbsimSim *sim);

// Advance up to `ticks` ticks, stopping at the configured duration.
// Scripted events fire on their tick. `advanced` may be null.
//
// # Safety
// `sim` must be a live handle; `advanced` null or writable.
enum UrbsimStatus urbsim_sim_step(struct UrbsimSim *sim, uint64_t ticks, uint64_t *advanced);

// Apply a command given in the wire format, for example
// `{"type":"bar_edge","edge":3}`. Pacing commands are rejected.
//
// # Safety
// `sim` must be a live handle and `command_json` NUL-terminated.
enum UrbsimStatus urbsim_sim_apply(struct UrbsimSim *sim, const char *command_json);

// # Safety
// `sim` must be a live handle and `out` writable.
enum UrbsimStatus urbsim_sim_stats(const struct UrbsimSim *sim, struct UrbsimStats *out);

// Current state as a snapshot message, the same JSON the live service
// broadcasts. Free the result with [`urbsim_string_free`].
//
// # Safety
// `sim` must be a live handle and `out` writable.
enum UrbsimStatus urbsim_sim_snapshot_json(const struct UrbsimSim *sim,
                                           uint64_t max_vehicles,
                                           char **out);

// # Safety
// `s` must come from this library and not be used afterwards.
void urbsim_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* URBSIM_H */
