#pragma once

#include "actguard/types.hpp"

namespace actguard {

/// Euclidean distance between two actions over all 7 components.
/// This is the action error the quantile regressor learns to bound.
double action_error(const ActionVector& predicted, const ActionVector& expert);

/// Euclidean distance over the 6 pose components only (gripper excluded,
/// it is a command on a different scale).
double target_distance6(const ActionVector& predicted, const ActionVector& expert);

/// Cosine similarity between two actions, in [-1, 1].
/// Throws DegenerateInputError if either vector has zero norm.
double target_cosine(const ActionVector& predicted, const ActionVector& expert);

}  // namespace actguard
