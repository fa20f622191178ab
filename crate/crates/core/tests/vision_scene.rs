//! Vision against rendered camera frames.

mod support;

use arianna_core::geometry::{Point2, Rect};
use arianna_core::pathgraph::{Deployment, DeploymentId, Edge, EdgeId, Node, NodeId, NodeKind, QrAnchor, QrId, TravelDirection};
use arianna_core::scene::{generate_world, project_ground, rasterize_floor, render_frame, CameraIntrinsics, Pose, RasterParams, WorldParams};
use arianna_core::vision::{detect_lane, detect_markers, segment_colors, MarkerKind, VisionParams};
use arianna_core::ColorId;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn straight_fixture() -> Deployment {
    let a = Node { id: NodeId(0), position: Point2::new(0.0, 0.0), kind: NodeKind::PointOfInterest, label: None };
    let b = Node { id: NodeId(1), position: Point2::new(0.0, 6.0), kind: NodeKind::PointOfInterest, label: None };
    Deployment {
        deployment_id: DeploymentId(1),
        version: 1,
        edges: vec![Edge {
            id: EdgeId(0),
            from: a.id,
            to: b.id,
            polyline: vec![a.position, b.position],
            color_pair: (ColorId::Red, ColorId::Blue),
            enabled: true,
        }],
        anchors: vec![
            QrAnchor { qr_id: QrId(5), node: a.id, position: a.position, size: 0.2 },
            QrAnchor { qr_id: QrId(6), node: b.id, position: b.position, size: 0.2 },
        ],
        nodes: vec![a, b],
        floor_bounds: Rect::new(Point2::new(-2.0, -2.0), Point2::new(2.0, 8.0)),
    }
}

#[test]
fn walking_forward_on_red_blue_reads_red_then_blue() {
    let d = straight_fixture();
    let raster = rasterize_floor(&d, &RasterParams::default());
    let k = CameraIntrinsics::default();
    let p = VisionParams::default();
    let pose = Pose::new(Point2::new(0.0, 2.0), core::f64::consts::FRAC_PI_2);
    let f = render_frame(&raster, &pose, &k);
    let det = detect_lane(&segment_colors(&f, &p), &p).expect("lane");
    assert_eq!(det.ordered_pair, (ColorId::Red, ColorId::Blue));
    assert!(det.axis_angle.abs() < 5f64.to_radians(), "{}", det.axis_angle);
    assert!(det.confidence > 0.5, "{}", det.confidence);

    let back = Pose::new(Point2::new(0.0, 4.0), -core::f64::consts::FRAC_PI_2);
    let f = render_frame(&raster, &back, &k);
    let det = detect_lane(&segment_colors(&f, &p), &p).expect("lane");
    assert_eq!(det.ordered_pair, (ColorId::Blue, ColorId::Red));
}

#[test]
fn lane_mask_sits_over_the_strips() {
    // Every lane-mask pixel should back-project to within the lane corridor
    // plus a little slack for pixel footprint.
    let d = straight_fixture();
    let raster = rasterize_floor(&d, &RasterParams::default());
    let k = CameraIntrinsics::default();
    let p = VisionParams::default();
    let pose = Pose::new(Point2::new(0.1, 2.0), core::f64::consts::FRAC_PI_2 + 0.1);
    let f = render_frame(&raster, &pose, &k);
    let det = detect_lane(&segment_colors(&f, &p), &p).expect("lane");
    for y in 0..k.height {
        for x in 0..k.width {
            if det.lane_mask.contains(x, y) {
                let g = project_ground(&pose, &k, (x as f64 + 0.5, y as f64 + 0.5)).floor().unwrap();
                assert!(g.x.abs() < 0.075 + 0.03, "pixel ({x},{y}) -> {g:?}");
            }
        }
    }
}

#[test]
fn node_marker_under_the_camera_decodes() {
    let mut d = straight_fixture();
    d.anchors[0].size = 0.3;
    let raster = rasterize_floor(&d, &RasterParams::default());
    let k = CameraIntrinsics::default();
    let p = VisionParams::default();
    // A 0.3 m marker about 0.4 m ahead spans more than 60 px each way.
    let pose = Pose::new(Point2::new(0.0, -0.4), core::f64::consts::FRAC_PI_2);
    let f = render_frame(&raster, &pose, &k);
    let det = detect_markers(&f, &segment_colors(&f, &p), &p);
    assert_eq!(det.sightings.len(), 1, "{det:?}");
    assert_eq!(det.sightings[0].payload.kind, MarkerKind::Node);
    assert_eq!(det.sightings[0].payload.id, 5);
    assert!(det.sightings[0].area >= 3600.0, "{}", det.sightings[0].area);
}

#[test]
fn bare_floor_has_no_markers() {
    let d = straight_fixture();
    let raster = rasterize_floor(&d, &RasterParams::default());
    let k = CameraIntrinsics::default();
    let p = VisionParams::default();
    let pose = Pose::new(Point2::new(1.5, 3.0), core::f64::consts::FRAC_PI_2);
    let f = render_frame(&raster, &pose, &k);
    let m = segment_colors(&f, &p);
    assert!(detect_markers(&f, &m, &p).sightings.is_empty());
    assert!(detect_lane(&m, &p).is_none());
}

#[test]
fn lane_decode_rate_on_generated_worlds() {
    let tally = support::codec_chain(0..20, 12, &mut ChaCha8Rng::seed_from_u64(7));
    println!("lane decode {}/{} = {:.3}, reversed {}", tally.correct, tally.total, tally.rate(), tally.reversed);
    assert!(tally.rate() >= 0.95);
    assert_eq!(tally.reversed, 0);
}

#[test]
fn approaching_a_node_scans_its_marker() {
    // Walk every edge end-on toward each node; some frame along the approach
    // must decode that node's marker and no frame may decode a wrong one.
    let k = CameraIntrinsics::default();
    let p = VisionParams::default();
    let (mut approaches, mut scanned) = (0, 0);
    for seed in 0..10 {
        let wp = WorldParams { seed, ..Default::default() };
        let d = generate_world(&wp).unwrap();
        let raster = rasterize_floor(&d, &wp.raster_params());
        for e in &d.edges {
            let len = e.length();
            for dir in [TravelDirection::Forward, TravelDirection::Backward] {
                let target = if dir == TravelDirection::Forward { e.to } else { e.from };
                let qr = d.anchors_of(target).next().unwrap().qr_id.0;
                approaches += 1;
                let mut hit = false;
                for step in 0..=15 {
                    let remaining = 1.5 - step as f64 * 0.1;
                    if remaining > len - 0.3 {
                        continue;
                    }
                    let s = if dir == TravelDirection::Forward { len - remaining } else { remaining };
                    let (pt, t) = e.point_at(s);
                    let t = if dir == TravelDirection::Forward { t } else { -t };
                    let f = render_frame(&raster, &Pose::new(pt, t.y.atan2(t.x)), &k);
                    for sgt in detect_markers(&f, &segment_colors(&f, &p), &p).sightings {
                        assert_eq!(sgt.payload.kind, MarkerKind::Node);
                        let known = d.anchors.iter().any(|a| a.qr_id.0 == sgt.payload.id);
                        assert!(known, "phantom marker {:?}", sgt.payload);
                        hit |= sgt.payload.id == qr;
                    }
                }
                scanned += hit as usize;
            }
        }
    }
    assert_eq!(scanned, approaches);
}
