from featprop.clustering.clustering import (ClusterResult, kcenter_greedy, kcenter_objective, kmeans, kmedoids_approx,
                                            kmedoids_objective)
