"""On-disk views: checkpoints, result files, reports and plots."""
