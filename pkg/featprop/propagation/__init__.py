from featprop.propagation.propagation import PropagatedFeatures, min_distances_to_set, pair_distance, propagate
