"""Value records shared across the tracker."""
