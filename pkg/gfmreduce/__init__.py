'''
Full- and reduced-order models of a grid-forming inverter under dispatchable
virtual oscillator control, with:
- a smooth current-reference limiter and its anti-windup
- reduced models for inductive and resistive lines, with manifold reconstruction
- modal and participation-factor analysis
- a segment-wise simulation engine and a batch command line
'''
