"""File formats: SVG scenes, PNG images and masks, run traces, config files."""
